"""Numba and numpy kernel builds must agree bit for bit.

Kernels take pre-drawn uniforms instead of RNG handles precisely so the
two builds walk identical sample paths; these tests pin that contract on
every registered kernel through its public entry point.
"""
import numpy as np
import pytest

from gridgame import backend
from gridgame import gamesolve, marl
from gridgame.netmodel import load_ieee33, power_flow


@pytest.fixture(autouse=True)
def restore_backend():
    before = backend.active_backend()
    yield
    backend.set_backend(before)


def both(workload):
    results = {}
    for name in ("numpy", "numba"):
        backend.set_backend(name)
        results[name] = workload()
    return results["numpy"], results["numba"]


def random_matrix(seed, shape=(10, 10)):
    return np.random.default_rng(seed).random(shape)


class TestSelection:
    def test_registry_contents(self):
        assert backend.registered_kernels() == [
            "_fp_kernel", "_mdp_kernel", "_rm_kernel",
            "_single_kernel", "_sweep_kernel"]

    def test_bad_name_rejected(self):
        with pytest.raises(ValueError):
            backend.set_backend("cuda")

    def test_round_trip(self):
        backend.set_backend("numpy")
        assert backend.active_backend() == "numpy"
        backend.set_backend("numba")
        assert backend.active_backend() == "numba"

    def test_thread_count_parsing(self, monkeypatch):
        monkeypatch.setenv("GRIDGAME_THREADS", "4")
        assert backend.thread_count() == 4
        monkeypatch.setenv("GRIDGAME_THREADS", "0")
        assert backend.thread_count() == 1
        monkeypatch.setenv("GRIDGAME_THREADS", "lots")
        assert backend.thread_count() == 1
        monkeypatch.delenv("GRIDGAME_THREADS")
        assert backend.thread_count() == 1


class TestParity:
    def test_power_flow_sweep(self):
        # the sweep is pure arithmetic (no sampling), so jit instruction
        # scheduling may reassociate at the last ulp; parity is numerical
        net = load_ieee33()
        a, b = both(lambda: power_flow(net))
        assert a.converged == b.converged
        va = np.array([a.voltages[k] for k in sorted(a.voltages)])
        vb = np.array([b.voltages[k] for k in sorted(b.voltages)])
        assert np.allclose(va, vb, atol=1e-12, rtol=0)

    def test_fictitious_play(self):
        m = random_matrix(0)
        a, b = both(lambda: gamesolve.nash_fictitious_play(m, max_iters=3000))
        assert np.array_equal(a.attacker.probs, b.attacker.probs)
        assert np.array_equal(a.defender.probs, b.defender.probs)
        assert a.game_value == b.game_value

    def test_regret_matching(self):
        m = random_matrix(1)
        a, b = both(lambda: gamesolve.regret_matching(m, T=5000, seed=7))
        assert np.array_equal(a.attacker.probs, b.attacker.probs)
        assert np.array_equal(a.defender.probs, b.defender.probs)
        assert a.trajectory == b.trajectory

    def test_single_agent_training(self):
        m = random_matrix(2)
        opp = gamesolve.MixedStrategy(np.full(10, 0.1))
        cfg = marl.LearningConfig(episodes=20_000, seed=3)
        a, b = both(lambda: marl.train_single_agent(m, opp, cfg))
        assert a.greedy == b.greedy
        assert np.array_equal(np.asarray(a.q_rows), np.asarray(b.q_rows))

    def test_mdp_training(self):
        m = random_matrix(3, (4, 4))
        mdp = marl.stage_mdp_default(m)
        cfg = marl.LearningConfig(episodes=20_000, seed=4, gamma=0.8,
                                  alpha_schedule="power", alpha_power=0.6)
        a, b = both(lambda: marl.mdp_train(mdp, cfg))
        assert np.array_equal(a.values, b.values)
        assert a.attacker.greedy == b.attacker.greedy
        assert a.defender.greedy == b.defender.greedy

    def test_self_play(self):
        m = random_matrix(4, (6, 6))
        cfg = marl.LearningConfig(episodes=20_000, seed=5,
                                  epsilon_decay=0.9995)
        a, b = both(lambda: marl.train_multi_agent(m, cfg))
        assert a.value == b.value
        assert a.converged == b.converged


class TestDispatcher:
    def test_py_func_exposed(self):
        # plain build stays reachable for inspection regardless of backend
        from gridgame.gamesolve import _fp_kernel
        assert callable(_fp_kernel.py_func)
        m = np.array([[1.0, 0.0], [0.0, 1.0]])
        pa, pd, iters, eps = _fp_kernel.py_func(m, 100, 0.0, 100)
        assert pa.sum() == pytest.approx(1.0)
        assert iters == 100

    def test_env_var_honored_at_import(self, monkeypatch):
        # a fresh interpreter started with GRIDGAME_BACKEND=numpy must not jit
        import subprocess
        import sys
        code = ("import gridgame.backend as b; print(b.active_backend())")
        out = subprocess.run(
            [sys.executable, "-c", code],
            env={"PATH": "/usr/bin:/bin:/usr/local/bin",
                 "GRIDGAME_BACKEND": "numpy"},
            capture_output=True, text=True)
        assert out.stdout.strip() == "numpy"
