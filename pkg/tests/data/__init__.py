from .corpus import gen_edit_corpus, gen_identity_corpus, pluralize, write_corpus
from .utils import TOY_WORDS, Fake
