import math


def conjugate(p: float) -> float:
    """Hoelder conjugate p' = p / (p - 1); infinite for p = 1"""
    return math.inf if p == 1.0 else p / (p - 1.0)


def validate_lebesgue_exponent(p: float) -> bool:
    """
    Validate the integrability exponent of the initial data

    Args:
        p: Lebesgue exponent

    Returns:
        True if p lies in (1, 2], False otherwise
    """
    return 1.0 < p <= 2.0


def interpolation_floor(d: int, p: float) -> float:
    """Lowest homogeneous order reachable through the mixed interpolation route"""
    return d * (d + 2) * (2.0 - p) / (2.0 * (2.0 * p + d * (2.0 - p)))


def validate_maximal_window(d: int, alpha: float) -> bool:
    """
    Validate the order for the direct maximal estimate of the stochastic convolution

    Args:
        d: space dimension
        alpha: Sobolev order of the error norm

    Returns:
        True if alpha lies in (d/2, d/2 + 1), False otherwise
    """
    return d / 2.0 < alpha < d / 2.0 + 1.0


def validate_interpolation_window(d: int, p: float, alpha: float, epsilon: float) -> bool:
    """
    Validate the order for the mixed interpolation route

    Args:
        d: space dimension
        p: Lebesgue exponent of the initial data
        alpha: Sobolev order of the error norm
        epsilon: slack used in the interpolation exponent

    Returns:
        True if alpha lies in (alpha*, d/2] and the interpolation weight is in (0, 1)
    """
    if not interpolation_floor(d, p) < alpha <= d / 2.0:
        return False
    theta = conjugate(p) * (d / 2.0 + epsilon - alpha) / d
    return 0.0 < theta < 1.0


def validate_inhomogeneous_window(d: int, p: float, alpha: float) -> bool:
    """
    Validate the order for the inhomogeneous transport estimate

    Returns:
        True if alpha lies in (d(1/p - 1/2), d/2], False otherwise
    """
    return d * (1.0 / p - 0.5) < alpha <= d / 2.0


def validate_euler_window(p: float, alpha: float, epsilon: float) -> bool:
    """
    Validate (p, alpha) for the vorticity estimate in d = 2

    Args:
        p: Lebesgue exponent of the initial vorticity
        alpha: Sobolev order of the error norm
        epsilon: slack used in the interpolation exponent

    Returns:
        True if p is in (sqrt 2, 2), alpha in (2 - p, 2 - 2/p) and the weight in (0, 1)
    """
    if not math.sqrt(2.0) < p < 2.0:
        return False
    if not 2.0 - p < alpha < 2.0 - 2.0 / p:
        return False
    theta = conjugate(p) * (1.0 - alpha + epsilon) / 2.0
    return 0.0 < theta < 1.0


def validate_sup_route(d: int, p: float, alpha: float) -> bool:
    """
    Validate the order for the sup-norm route of the homogeneous estimate

    Returns:
        True if alpha lies in (d/p - d/2, d/2], False otherwise
    """
    return d / p - d / 2.0 < alpha <= d / 2.0


def validate_resolvable(ell: float, max_wavenumber: float) -> bool:
    """
    Validate that the Kraichnan band of scale ell fits on the lattice

    Returns:
        True if 2/ell does not exceed the largest lattice wavenumber
    """
    return 2.0 / ell <= max_wavenumber * (1.0 + 1e-12)
