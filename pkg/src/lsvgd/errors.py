"""Exception types shared by the samplers and the toy GAN."""


class NumericalFailure(FloatingPointError):
    """A computation produced non-finite values or could not be normalized.

    ``index`` names the offending particle (or training iteration) when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
