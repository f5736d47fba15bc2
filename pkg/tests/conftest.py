import numpy as np


def batch_rand(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rand index of each row pair of two ``(draws, n)`` label arrays."""
    n = a.shape[1]
    iu = np.triu_indices(n, 1)
    sa = (a[:, :, None] == a[:, None, :])[:, iu[0], iu[1]]
    sb = (b[:, :, None] == b[:, None, :])[:, iu[0], iu[1]]
    return (sa == sb).mean(axis=1)


def n_clusters_rows(labels: np.ndarray) -> np.ndarray:
    s = np.sort(labels, axis=1)
    return 1 + (np.diff(s, axis=1) != 0).sum(axis=1)


def within_se(samples, target, k=4.0):
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / np.sqrt(len(samples))
    return abs(samples.mean() - target) <= k * se + 1e-12, samples.mean(), se


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
