"""Pure numpy fallback for the compiled kernels in ``_ckernels.pyx``."""
import numpy as np

# coherences whose electron index differs
_ELECTRON_FLIP = (np.arange(4)[:, None] >> 1) != (np.arange(4)[None, :] >> 1)


def _xlog2x(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0.0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


def _branches(rho, u0, u1):
    r = np.asarray(rho).reshape(2, 2, 2, 2)  # [a, b, a', b']
    w0, w1 = np.conj(u0), np.conj(u1)
    w = np.stack([w0, w1])
    u = np.stack([u0, u1])
    m = np.einsum("b...,abcd,d...->ac...", w, r, u)
    a, d, off = m[0, 0].real, m[1, 1].real, m[0, 1]
    p = a + d
    disc = np.sqrt((a - d) ** 2 + 4.0 * (off.real ** 2 + off.imag ** 2))
    return _xlog2x(p) - _xlog2x(0.5 * (p + disc)) - _xlog2x(0.5 * (p - disc))


def _cond(rho, theta, phi):
    ct, st = np.cos(theta), np.sin(theta)
    e = np.exp(1j * phi)
    ct, st, e = np.broadcast_arrays(ct, st, e)
    return _branches(rho, ct + 0j, e * st) + _branches(rho, np.conj(e) * st, -ct + 0j)


def cond_entropy(rho, theta, phi):
    return float(_cond(np.asarray(rho, dtype=complex), float(theta), float(phi)))


def cond_entropy_grid(rho, thetas, phis):
    th, ph = np.meshgrid(np.asarray(thetas, float), np.asarray(phis, float), indexing="ij")
    return _cond(np.asarray(rho, dtype=complex), th, ph)


def free_evolve(nodes, de, dn, dt, hom):
    de = np.asarray(de, float)
    dn = np.asarray(dn, float)
    om = 0.5 * np.stack([de + dn, de - dn, -de + dn, -de - dn], axis=1)
    rate = om[:, :, None] - om[:, None, :]
    fac = np.exp(-1j * rate * dt)
    fac[:, _ELECTRON_FLIP] *= hom
    nodes *= fac
