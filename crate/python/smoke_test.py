"""Smoke test for the lyapdelay extension module.

Build with `maturin develop -m crates/python/Cargo.toml --release`, or
copy the release cdylib next to this script as `lyapdelay.so`.
"""

import math

import lyapdelay


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    mesh = lyapdelay.ChebyshevMesh(10, -3.0, -1.0)
    assert len(mesh) == 11 and mesh.nodes[0] == -1.0
    # Clenshaw-Curtis is exact for cubics.
    vals = [t**3 for t in mesh.nodes]
    assert close(mesh.integrate(vals), (1.0 - 81.0) / 4.0, 1e-12)
    assert close(mesh.interpolate(vals, -2.5), -15.625, 1e-12)

    q, r = lyapdelay.qr_positive([[2.0, 1.0], [1.0, 3.0]])
    assert r[0][0] > 0 and r[1][1] > 0 and r[1][0] == 0.0
    ev = sorted(lyapdelay.eigenvalues([[0.0, 1.0], [-1.0, 0.0]]), key=lambda z: z.imag)
    assert close(ev[0].imag, -1.0, 1e-12) and close(ev[1].imag, 1.0, 1e-12)

    les = lyapdelay.constant_exponents([[1.0, 0.0], [0.0, -2.0]], 100.0, le_tol=1e-10, frame="identity")
    assert close(les[0], 1.0, 1e-8) and close(les[1], -2.0, 1e-8), les

    sys = lyapdelay.System("quad", gamma=2.0, MX=15)
    assert sys.dim == 15
    eq = dict(sys.equilibria())["nontrivial"]
    assert max(abs(v) for v in sys.rhs(eq)) < 1e-8
    oracle = sys.equilibrium_exponents("nontrivial")
    assert oracle[0] < 0

    lam = lyapdelay.lyapunov_exponents("quad", gamma=2.0, MX=15, T=200, exponents=2)
    assert close(lam[0], oracle[0], 2e-2), (lam, oracle[:2])

    csv = lyapdelay.run_command("solve", "zero", T=1.0, init="equilibrium:trivial")
    lines = csv.strip().split("\n")
    assert lines[0] == "t,x" and len(lines) == 22
    assert all(float(l.split(",")[1]) == 0.0 for l in lines[1:])

    times, values = lyapdelay.quad_trapezoidal(2.0, 16, 10.0)
    assert len(times) == len(values) and math.isfinite(values[-1])

    try:
        lyapdelay.System("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown model accepted")

    print("smoke test passed:", lyapdelay.__version__)


if __name__ == "__main__":
    main()
