"""Exception hierarchy for the whole package."""


class CompactChainError(Exception):
    """Base class for every error raised by this package."""


# --- group / arithmetic ---

class ModulusTooSmall(CompactChainError):
    pass


class NonCoprimeGenerator(CompactChainError):
    pass


class NonInvertible(CompactChainError):
    """gcd(base, N) != 1: the element has no inverse, and the gcd is a factor of N."""


class NotCoprime(CompactChainError):
    pass


class PrimeSearchExhausted(CompactChainError):
    pass


# --- accumulator ---

class MemberNotInCohort(CompactChainError):
    pass


class MemberPresent(CompactChainError):
    """The element is already in the accumulated product; no non-membership witness exists."""


# --- chain state ---

class DuplicateCoin(CompactChainError):
    pass


class StaleWitness(CompactChainError):
    pass


class FutureWitness(CompactChainError):
    pass


class UnknownHeight(CompactChainError):
    pass


class InvalidCommitmentProof(CompactChainError):
    pass


class InvalidTransaction(CompactChainError):
    def __init__(self, index: int, reason: str = ""):
        self.index = index
        self.reason = reason
        super().__init__(f"transaction {index} invalid" + (f": {reason}" if reason else ""))


class BrokenChainLink(CompactChainError):
    pass


# --- wallet ---

class CoinNotInBlock(CompactChainError):
    pass


class CoinAlreadySpentInBlock(CompactChainError):
    pass


class CoinSpent(CompactChainError):
    """The coin's prime divides the interval's spent product: it was consumed."""


# --- baselines ---

class WitnessInvalid(CompactChainError):
    def __init__(self, message: str = "witness does not verify", index: int | None = None):
        self.index = index
        super().__init__(message if index is None else f"{message} (input {index})")


# --- netsim ---

class DegenerateConfig(CompactChainError):
    pass
