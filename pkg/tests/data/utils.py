from faker import Faker
from faker.providers import BaseProvider

__all__ = ("Fake", "TOY_WORDS")

Fake = Faker("en_US")
Fake.seed_instance(1234)

# Small closed vocabulary so toy models see every word many times
TOY_WORDS = ("the", "cat", "dog", "is", "grey", "big", "small", "house", "red", "runs", "sleeps", "a")


class SentenceProvider(BaseProvider):
    def toy_sentence(self, min_len: int = 3, max_len: int = 6) -> list[str]:
        length = self.random_int(min_len, max_len)
        return [self.random_element(TOY_WORDS) for _ in range(length)]

    def token_pair(self, alphabet: tuple[str, ...] = ("a", "b", "c"), max_len: int = 6) -> tuple[list[str], list[str]]:
        return (
            [self.random_element(alphabet) for _ in range(self.random_int(0, max_len))],
            [self.random_element(alphabet) for _ in range(self.random_int(0, max_len))],
        )


Fake.add_provider(SentenceProvider)
