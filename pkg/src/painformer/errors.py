"""Contract violations raised at module boundaries."""


class ContractError(ValueError):
    """An input broke a documented precondition (shape, range, or config)."""


def require(cond: bool, msg: str) -> None:
    if not cond:
        raise ContractError(msg)
