from biphasic.material import MaterialParams


def cartilage(nu_s, E_s=1.0e6, k_perm=1.0e-15, radius=3.0e-3, height=1.0e-3):
    """Cartilage-like plug; nu_s = 0.5 is represented by an infinite lambda."""
    if nu_s == 0.5:
        return MaterialParams(E_s / 3.0, float("inf"), k_perm, radius, height)
    return MaterialParams.from_young(E_s, nu_s, k_perm, radius, height)


def harmonic_fit(t, y, omega):
    """Least-squares ``(a, b)`` with ``y ~ c + a cos(wt) + b sin(wt)``."""
    import numpy as np

    design = np.column_stack([np.ones_like(t), np.cos(omega * t), np.sin(omega * t)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef[1], coef[2]
