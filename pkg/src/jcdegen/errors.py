"""Exception types raised by jcdegen."""


class DomainError(ValueError):
    """Arguments index no physical state or violate an operation's precondition."""


class IntegrationError(RuntimeError):
    """The master-equation integrator could not meet its local error target."""

    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (t={t!r})")
        self.t = t
