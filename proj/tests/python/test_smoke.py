import math
import os
import subprocess

import pytest

import bobylev as bb


def test_kernel_constants():
    assert bb.gamma2(bb.KernelSpec.constant()).value == pytest.approx(2 * math.pi, abs=1e-10)
    assert bb.lambda_alpha(bb.KernelSpec.constant(), 1.0).value == pytest.approx(2 * math.pi / 3, abs=1e-8)
    assert bb.lambda_alpha(bb.KernelSpec.singular(0.25), 2.0).value == 0.0
    assert bb.gamma2(bb.KernelSpec.singular(0.25)).divergent
    assert not bb.gamma2(bb.KernelSpec.singular(0.25).with_cutoff(10)).divergent


def test_errors_map_to_exception_classes():
    with pytest.raises(bb.DomainError):
        bb.gamma_alpha(bb.KernelSpec.constant(), 3.0)
    assert issubclass(bb.DomainError, bb.Error)
    assert issubclass(bb.Error, RuntimeError)


def test_gaussian_norms():
    g = bb.CharFn.gaussian(1.0)
    m = bb.m_norm(g, bb.CharFn.unit(), 1.0)
    assert m.value == pytest.approx(4 * math.pi * math.sqrt(math.pi / 2), rel=1e-5)
    assert bb.moment_upper(g, 1.0).estimate == pytest.approx(2 * math.sqrt(2 / math.pi), abs=1e-4)
    assert bb.sup_norm(bb.CharFn.stable(1.0), bb.CharFn.unit(), 1.0).value <= 1.0


def test_charfn_evaluation():
    g = bb.CharFn.gaussian(1.0)
    assert g((1.0, 0.0, 0.0)) == pytest.approx(math.exp(-0.5))
    d = bb.CharFn.discrete([(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0)], [0.5, 0.5])
    assert d((0.3, 0.0, 0.0)).real == pytest.approx(math.cos(0.3))
    assert not d.isotropic


def test_unit_and_gaussian_evolution():
    grid = bb.RadialGrid.make()
    cfg = bb.SolverConfig()
    cfg.T = 0.2
    cfg.dt = 0.05
    unit = bb.evolve(bb.sample_radial(bb.CharFn.unit(), grid), cfg)
    assert all(v == 1.0 for s in unit.snapshots for v in s.values)
    gauss = bb.evolve(bb.sample_radial(bb.CharFn.gaussian(1.0), grid), cfg)
    final = gauss.snapshots[-1]
    err = max(abs(v - math.exp(-0.5 * r * r)) for r, v in zip(final.radii, final.values))
    assert err <= 1e-6
    assert len(gauss.times) == 5


def test_density_inversion():
    psi = bb.sample_radial(bb.CharFn.gaussian(1.0), bb.RadialGrid.make())
    p = bb.inverse_transform(psi, bb.speed_grid(10.0, 500), 40.0)
    assert p.valid
    assert p.mass == pytest.approx(1.0, abs=1e-6)
    assert p.f[0] == pytest.approx((2 * math.pi) ** -1.5 * math.exp(-0.5 * p.v[0] ** 2), rel=1e-4)


@pytest.mark.skipif(not os.environ.get("BOBYLEV_CLI"), reason="runner not built")
def test_runner_lists_experiments():
    out = subprocess.run([os.environ["BOBYLEV_CLI"], "--list"], check=True, capture_output=True, text=True).stdout
    names = [line.split()[0] for line in out.splitlines()]
    assert len(names) == 9
    assert names == sorted(names)
