class ConcentrationError(Exception):
    """
    Base class of every error raised by the concentration app.
    """


class InvalidModel(ConcentrationError):
    pass


class UnsupportedGraph(ConcentrationError):
    pass


class ZeroDegree(ConcentrationError):
    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(
            f"Vertex {vertex} has zero degree; regularize (tau > 0) before building the Laplacian."
        )


class DimensionMismatch(ConcentrationError):
    def __init__(self, left, right):
        self.left = tuple(left)
        self.right = tuple(right)
        super().__init__(f"Operator shapes differ: {self.left} vs {self.right}.")


class NoConvergence(ConcentrationError):
    def __init__(self, max_iter: int, estimate=None):
        self.max_iter = max_iter
        self.estimate = estimate
        super().__init__(f"Iteration did not converge within {max_iter} steps.")


class SizeExceeded(ConcentrationError):
    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"Size {size} exceeds the limit of {limit}.")


class WidthExceeded(ConcentrationError):
    def __init__(self, width: int, limit: int):
        self.width = width
        self.limit = limit
        super().__init__(f"Exact sign enumeration needs at most {limit} columns, got {width}.")


class EntryOutOfRange(ConcentrationError):
    pass


class RowFilterEmpty(ConcentrationError):
    pass


class InvalidRates(ConcentrationError):
    pass


class ZeroGap(ConcentrationError):
    pass


class LengthMismatch(ConcentrationError):
    def __init__(self, left: int, right: int):
        super().__init__(f"Label vectors have different lengths: {left} vs {right}.")


class CertificateViolation(ConcentrationError):
    pass
