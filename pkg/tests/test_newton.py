import numpy as np
import pytest

from ipgobs import (
    ConstantAlpha,
    IpgConfig,
    IpgState,
    NewtonConfig,
    ObservabilityWindow,
    SingularJacobianError,
    SystemModel,
    builtin_system,
    ipg_inner_step,
    newton_inner_step,
    run_ipg_observer,
    run_newton_observer,
    simulate,
)


def quadratic_window():
    """h(w) = w^2, H_x = 2w."""
    sys = SystemModel(
        n=1, m=0, p=1,
        dynamics=lambda x, u: x.copy(),
        output=lambda x: x**2,
        dynamics_jacobian=lambda x, u: np.array([[1.0]]),
        output_jacobian=lambda x: np.array([[2.0 * x[0]]]),
    )
    return ObservabilityWindow(sys, 1)


class TestInnerStep:
    def test_linear_map_one_step(self):
        sys = builtin_system("scalar_linear", {"a": 0.5})
        win = ObservabilityWindow(sys, 1)
        out = newton_inner_step(np.array([2.0]), np.array([1.0]), win)
        assert out[0] == 1.0

    def test_fixed_point_stays(self):
        win = quadratic_window()
        out = newton_inner_step(np.array([1.0]), np.array([1.0]), win)
        assert out[0] == 1.0

    def test_square_root_iteration(self):
        win = quadratic_window()
        w = newton_inner_step(np.array([2.0]), np.array([1.0]), win)
        assert abs(w[0] - 1.25) < 1e-15
        w = newton_inner_step(w, np.array([1.0]), win)
        assert abs(w[0] - 1.025) < 1e-15

    def test_singular_jacobian_raises(self):
        win = quadratic_window()
        with pytest.raises(SingularJacobianError) as err:
            newton_inner_step(np.array([0.0]), np.array([1.0]), win)
        assert err.value.point is not None

    def test_damping_scales_the_step(self):
        win = quadratic_window()
        full = newton_inner_step(np.array([2.0]), np.array([1.0]), win, damping=1.0)
        half = newton_inner_step(np.array([2.0]), np.array([1.0]), win, damping=0.5)
        assert abs((2.0 - half[0]) - 0.5 * (2.0 - full[0])) < 1e-15


class TestRun:
    def test_linear_system_exact_from_first_window(self):
        sys = builtin_system("planar_linear")
        tr = simulate(sys, [0.4, -0.6], steps=12)
        cfg = NewtonConfig(d=1, w_init=tr.states[0] + np.array([0.5, -0.3]))
        est, trace = run_newton_observer(sys, tr.outputs, config=cfg, truth=tr)
        _, errs = trace.per_instant_errors()
        assert max(errs) <= 1e-12

    def test_truth_init_zero_error(self):
        sys = builtin_system("cubic_output")
        tr = simulate(sys, [1.1], steps=10)
        cfg = NewtonConfig(d=2, w_init=np.array(tr.states[0]))
        est, trace = run_newton_observer(sys, tr.outputs, config=cfg, truth=tr)
        _, errs = trace.per_instant_errors()
        assert max(errs) == 0.0

    def test_newton_beats_low_iteration_ipg_pointwise(self):
        # direction verified empirically: per-instant error of the Newton
        # baseline sits below the preconditioned run at the same instant
        # while both are above the noise floor
        sys = builtin_system("planar_mild_nonlinear")
        tr = simulate(sys, [0.3, -0.2], steps=15)
        offset = np.array([0.1, 0.1])
        newton_cfg = NewtonConfig(d=3, w_init=tr.states[0] + offset)
        _, newton_trace = run_newton_observer(sys, tr.outputs, config=newton_cfg, truth=tr)
        ipg_cfg = IpgConfig(
            d=3, alpha_schedule=ConstantAlpha(0.5),
            w_init=tr.states[0] + offset, K_init=0.5 * np.eye(2),
        )
        _, ipg_trace = run_ipg_observer(sys, tr.outputs, config=ipg_cfg, truth=tr)
        _, newton_errs = newton_trace.per_instant_errors()
        _, ipg_errs = ipg_trace.per_instant_errors()
        compared = 0
        for ne, ie in zip(newton_errs, ipg_errs):
            if ne > 1e-13 or ie > 1e-13:
                assert ne <= ie
                compared += 1
        assert compared > 0


class TestNewtonLimit:
    def test_ipg_step_with_exact_inverse_matches_newton(self):
        sys = builtin_system("cubic_output")
        win = ObservabilityWindow(sys, 1)
        rng = np.random.default_rng(2)
        for _ in range(25):
            w = rng.uniform(0.5, 2.0, size=1)
            Y = np.array([rng.uniform(0.5, 3.0)])
            K = np.linalg.inv(win.jacobian(w))
            state = IpgState(w=w, K=K, k=0, i=0)
            via_ipg = ipg_inner_step(state, Y, win, alpha=0.3, delta_step=1.0).w
            via_newton = newton_inner_step(w, Y, win, damping=1.0)
            assert np.linalg.norm(via_ipg - via_newton) <= 1e-10
