import numpy as np
import pytest

from ipgobs import (
    ConfigurationError,
    ConstantAlpha,
    CustomAlpha,
    DivergenceError,
    IpgConfig,
    IpgState,
    ObservabilityWindow,
    SystemModel,
    TheoremSchedule,
    advance_window,
    builtin_system,
    fit_linear_rate,
    ipg_inner_step,
    measure_rho,
    propagate_estimate,
    run_ipg_observer,
    simulate,
    step_size,
)


def identity_scalar_window():
    """h(w) = w, so H(w) = w and H_x = 1."""
    sys = builtin_system("scalar_linear", {"a": 0.5})
    return ObservabilityWindow(sys, 1)


def doubled_scalar_window():
    """h(w) = 2w, so H_x = 2 everywhere."""
    sys = SystemModel(
        n=1, m=0, p=1,
        dynamics=lambda x, u: 0.5 * x,
        output=lambda x: 2.0 * x,
        dynamics_jacobian=lambda x, u: np.array([[0.5]]),
        output_jacobian=lambda x: np.array([[2.0]]),
    )
    return ObservabilityWindow(sys, 1)


class TestInnerStep:
    def test_updates_use_pre_update_pair(self):
        # K = 0 makes the w-update a no-op even though K' != 0; using the
        # post-update preconditioner in the w-step would move w to 1.5.
        w = identity_scalar_window()
        state = IpgState(w=np.array([2.0]), K=np.array([[0.0]]), k=0, i=0)
        nxt = ipg_inner_step(state, np.array([1.0]), w, alpha=0.5, delta_step=1.0)
        assert nxt.K[0, 0] == 0.5
        assert nxt.w[0] == 2.0
        assert nxt.i == 1

    def test_exact_preconditioner_takes_newton_step(self):
        w = identity_scalar_window()
        state = IpgState(w=np.array([2.0]), K=np.array([[1.0]]), k=0, i=0)
        nxt = ipg_inner_step(state, np.array([1.0]), w, alpha=0.5, delta_step=1.0)
        assert nxt.K[0, 0] == 1.0
        assert nxt.w[0] == 1.0

    def test_preconditioner_geometric_approach(self):
        # K <- K - 0.25 (2K - 1): after three steps 0.5 (1 - 0.5^3) = 0.4375
        w = doubled_scalar_window()
        state = IpgState(w=np.array([1.0]), K=np.array([[0.0]]), k=0, i=0)
        Y = np.array([2.0])
        for _ in range(3):
            state = ipg_inner_step(state, Y, w, alpha=0.25, delta_step=1.0)
        assert state.K[0, 0] == 0.4375

    def test_beta_shifts_only_the_preconditioner_update(self):
        w = identity_scalar_window()
        state = IpgState(w=np.array([2.0]), K=np.array([[0.4]]), k=0, i=0)
        Y = np.array([1.0])
        plain = ipg_inner_step(state, Y, w, alpha=0.5, delta_step=1.0, beta=0.0)
        shifted = ipg_inner_step(state, Y, w, alpha=0.5, delta_step=1.0, beta=2.0)
        assert shifted.w[0] == plain.w[0]
        # K' = K - alpha ((H_x + beta) K - 1) = 0.4 - 0.5 (3*0.4 - 1) = 0.3
        assert abs(shifted.K[0, 0] - 0.3) < 1e-15
        assert abs(plain.K[0, 0] - 0.7) < 1e-15

    def test_divergence_carries_location(self):
        w = identity_scalar_window()
        state = IpgState(w=np.array([2.0]), K=np.array([[1e13]]), k=4, i=2)
        with pytest.raises(DivergenceError) as err:
            ipg_inner_step(state, np.array([1.0]), w, alpha=0.5)
        assert err.value.k == 4
        assert err.value.i == 2


class TestPropagateAdvance:
    def test_single_window_propagation_is_identity(self):
        w = identity_scalar_window()
        assert propagate_estimate(np.array([7.0]), w)[0] == 7.0

    def test_one_application(self):
        halving = SystemModel(
            n=2, m=0, p=1,
            dynamics=lambda x, u: 0.5 * x,
            output=lambda x: x[:1].copy(),
        )
        win = ObservabilityWindow(halving, 2)
        out = propagate_estimate(np.array([4.0, 4.0]), win)
        assert tuple(out) == (2.0, 2.0)

    def test_three_window_composition(self):
        sys3 = SystemModel(
            n=3, m=0, p=1,
            dynamics=lambda x, u: np.array([x[1], 0.9 * x[0], x[2]]),
            output=lambda x: x[:1].copy(),
        )
        win = ObservabilityWindow(sys3, 3)
        out = propagate_estimate(np.array([1.0, 0.0, 0.0]), win)
        assert tuple(out[:2]) == (0.9, 0.0)

    def test_advance_propagates_w_keeps_K(self):
        w = identity_scalar_window()
        state = IpgState(w=np.array([4.0]), K=np.array([[0.9]]), k=3, i=5)
        nxt = advance_window(state, w)
        assert nxt.w[0] == 2.0
        assert nxt.K[0, 0] == 0.9
        assert (nxt.k, nxt.i) == (4, 0)

    def test_advance_identity_dynamics(self):
        sys = SystemModel(n=1, m=0, p=1, dynamics=lambda x, u: x.copy(), output=lambda x: x.copy())
        win = ObservabilityWindow(sys, 1)
        state = IpgState(w=np.array([1.3]), K=np.array([[2.0]]), k=0, i=1)
        nxt = advance_window(state, win)
        assert nxt.w[0] == 1.3
        assert nxt.K[0, 0] == 2.0

    def test_advance_planar(self):
        sys = builtin_system("planar_linear")
        win = ObservabilityWindow(sys, 2)
        state = IpgState(w=np.array([2.0, 1.0]), K=np.eye(2), k=1, i=2)
        nxt = advance_window(state, win)
        assert tuple(nxt.w) == (1.0, 1.8)
        assert np.array_equal(nxt.K, np.eye(2))


class TestStepSize:
    def test_constant(self):
        policy = ConstantAlpha(0.3)
        assert [step_size(i, policy) for i in range(4)] == [0.3] * 4

    def test_theorem_capped_by_inverse_lambda(self):
        policy = TheoremSchedule(Lambda=2.0, l=1e-3, rho=0.5, mu=1.5, varrho=0.4, D2=10.0)
        assert abs(step_size(0, policy) - 0.99 * 0.5) < 1e-15

    def test_theorem_formula_value(self):
        policy = TheoremSchedule(Lambda=1.0, l=1.0, rho=0.5, mu=1.5, varrho=0.4, D2=10.0)
        assert abs(step_size(0, policy) - 0.198) < 1e-15

    def test_custom_list(self):
        policy = CustomAlpha([0.1, 0.2])
        assert step_size(1, policy) == 0.2
        with pytest.raises(ConfigurationError):
            step_size(2, policy)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(Lambda=1.0, l=1.0, rho=1.1, mu=1.5, varrho=0.4, D2=1.0),   # rho >= 1
            dict(Lambda=1.0, l=1.0, rho=0.5, mu=0.9, varrho=0.4, D2=1.0),   # mu <= 1
            dict(Lambda=1.0, l=1.0, rho=0.8, mu=1.5, varrho=0.1, D2=1.0),   # mu*rho >= 1
            dict(Lambda=1.0, l=1.0, rho=0.5, mu=1.5, varrho=0.6, D2=1.0),   # varrho >= 1-rho
            dict(Lambda=1.0, l=1.0, rho=0.5, mu=1.5, varrho=0.4, D2=-1.0),  # D2 <= 0
            dict(Lambda=-1.0, l=1.0, rho=0.5, mu=1.5, varrho=0.4, D2=1.0),  # Lambda <= 0
        ],
    )
    def test_invalid_parameters_fail_at_construction(self, kwargs):
        with pytest.raises(ConfigurationError):
            TheoremSchedule(**kwargs)


class TestRunObserver:
    def test_truth_initialization_is_a_fixed_point(self):
        sys = builtin_system("scalar_linear", {"a": 0.5})
        tr = simulate(sys, [1.7], steps=12)
        cfg = IpgConfig(
            d=20, alpha_schedule=ConstantAlpha(0.5),
            w_init=np.array(tr.states[0]), K_init=np.eye(1),
        )
        est, trace = run_ipg_observer(sys, tr.outputs, config=cfg, truth=tr)
        _, errs = trace.per_instant_errors()
        assert max(errs) <= 1e-14

    def test_one_step_exactness_on_linear_map(self):
        sys = builtin_system("scalar_linear", {"a": 0.5})
        tr = simulate(sys, [1.7], steps=4)
        cfg = IpgConfig(
            d=1, alpha_schedule=ConstantAlpha(0.5),
            w_init=np.array([tr.states[0][0] + 1.0]), K_init=np.eye(1),
        )
        est, trace = run_ipg_observer(sys, tr.outputs, config=cfg, truth=tr)
        _, errs = trace.per_instant_errors()
        # H = identity and K = H_x^{-1}: the first inner step lands exactly
        assert max(errs) <= 1e-14

    def test_planar_linear_rate(self):
        # d = 1 keeps the per-instant decay observable above the fit floor;
        # more inner iterations drive the error to machine noise within the
        # first window because the stacked map is exactly linear.
        sys = builtin_system("planar_linear")
        tr = simulate(sys, [0.3, -0.2], steps=30)
        cfg = IpgConfig(
            d=1, alpha_schedule=ConstantAlpha(0.5),
            w_init=tr.states[0] + np.array([0.1, 0.1]), K_init=0.5 * np.eye(2),
        )
        est, trace = run_ipg_observer(sys, tr.outputs, config=cfg, truth=tr)
        _, errs = trace.per_instant_errors()
        errs = np.asarray(errs)
        usable = errs[errs > 1e-12]
        assert np.all(np.diff(np.log(usable)) < 0)
        fit = fit_linear_rate(errs)
        assert fit.mu_hat > 1.0

    def test_estimate_count_and_warmup(self):
        sys = builtin_system("planar_linear")
        tr = simulate(sys, [0.3, -0.2], steps=9)
        cfg = IpgConfig(
            d=2, alpha_schedule=ConstantAlpha(0.5),
            w_init=tr.states[0].copy(), K_init=np.eye(2),
        )
        est, trace = run_ipg_observer(sys, tr.outputs, config=cfg, truth=tr)
        # 10 measurements, N = 2: estimates start at instant 1
        assert len(est) == 9
        assert trace.first_instant() == 1

    def test_too_few_measurements_rejected(self):
        sys = builtin_system("planar_linear")
        cfg = IpgConfig(
            d=1, alpha_schedule=ConstantAlpha(0.5),
            w_init=np.zeros(2), K_init=np.eye(2),
        )
        with pytest.raises(ConfigurationError, match="at least 2 measurements"):
            run_ipg_observer(sys, [np.array([1.0])], config=cfg)

    def test_divergence_returns_partial_trace(self):
        sys = builtin_system("indefinite_jacobian")
        tr = simulate(sys, [2.5], steps=60)
        cfg = IpgConfig(
            d=40, alpha_schedule=ConstantAlpha(0.9),
            w_init=np.array([0.5]), K_init=np.eye(1),
        )
        with pytest.raises(DivergenceError) as err:
            run_ipg_observer(sys, tr.outputs, config=cfg, truth=tr)
        assert err.value.partial_trace is not None
        assert len(err.value.partial_trace) > 0


class TestContractionProperties:
    def test_lemma_contraction_bound_under_small_steps(self):
        # alpha < 1/Lambda with positive spectrum keeps every recorded
        # contraction below one, and the preconditioner error obeys the
        # one-step inequality with a curvature-bounded drift term.
        sys = builtin_system("cubic_output")
        tr = simulate(sys, [1.5], steps=15)
        win = ObservabilityWindow(sys, 1)
        region_max = 1.0 + 3.0 * 2.0**2  # Lambda over |x| <= 2
        alpha = 0.99 / region_max
        cfg = IpgConfig(
            d=6, alpha_schedule=ConstantAlpha(alpha),
            w_init=np.array([1.8]), K_init=np.array([[0.2]]),
        )
        est, trace = run_ipg_observer(sys, tr.outputs, config=cfg, truth=tr)
        assert all(v < 1.0 for _, _, v in trace.contractions())

        # replay the run to check the inequality: |K' - inv(J)| <=
        # |I - a J| |K - inv(J)| + gamma_drift, drift <= gamma * |w' - w|
        gamma_region = 6.0 * 2.0
        w = cfg.w_init.copy()
        K = np.array(cfg.K_init, dtype=float)
        for k in range(len(tr.outputs)):
            Y = np.array(tr.outputs[k])
            state = IpgState(w=w, K=K, k=k, i=0)
            for _ in range(cfg.d):
                J = win.jacobian(state.w)
                inv_now = np.linalg.inv(J)
                before = abs(state.K[0, 0] - inv_now[0, 0])
                contraction = abs(1.0 - alpha * J[0, 0])
                nxt = ipg_inner_step(state, Y, win, alpha)
                J_next = win.jacobian(nxt.w)
                inv_next = np.linalg.inv(J_next)
                after = abs(nxt.K[0, 0] - inv_next[0, 0])
                drift = gamma_region * abs(nxt.w[0] - state.w[0])
                assert after <= contraction * before + drift + 1e-12
                state = nxt
            w = sys.step(state.w)
            K = state.K

    def test_measured_rho_constant_jacobian(self):
        sys = builtin_system("scalar_linear", {"a": 0.5})
        tr = simulate(sys, [1.0], steps=10)
        cfg = IpgConfig(
            d=3, alpha_schedule=ConstantAlpha(0.5),
            w_init=np.array([1.4]), K_init=np.eye(1),
        )
        _, trace = run_ipg_observer(sys, tr.outputs, config=cfg, truth=tr)
        rho = measure_rho(trace)
        assert abs(rho.rho - 0.5) < 1e-10
        assert abs(rho.rho_N - 0.5) < 1e-10

    def test_beta_shift_contracts_despite_negative_eigenvalue(self):
        sys = builtin_system("indefinite_jacobian")
        win = ObservabilityWindow(sys, 1)
        lam_min, lam_max = -1.0, 3.0**2 - 1.0  # over [-1.5, 3]
        beta = -lam_min + 0.1
        alpha = 0.99 / (lam_max + beta)
        rng = np.random.default_rng(5)
        for _ in range(200):
            x = rng.uniform(-1.5, 3.0, size=1)
            J = win.jacobian(x)
            shifted = J + beta * np.eye(1)
            assert np.linalg.norm(np.eye(1) - alpha * shifted, 2) < 1.0
            # the plain update expands inside the indefinite zone
            if J[0, 0] < 0:
                assert np.linalg.norm(np.eye(1) - alpha * J, 2) > 1.0
