"""Matplotlib renderings of the solver outputs.

Figures are written next to the delimited files by the CLI report path;
everything uses the Agg backend so no display is required.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_base_state(state, path):
    """Velocity, temperature, magnetic potential and stresses over y."""
    y = np.linspace(-0.5, 0.5, 801)
    s = state.sample(y, names=("u", "Z", "L", "a11", "a12", "a22", "P"))
    fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True)

    axes[0, 0].plot(y, s["u"], color="tab:blue")
    axes[0, 0].set_ylabel("u")
    axes[0, 1].plot(y, s["Z"], color="tab:red")
    axes[0, 1].set_ylabel("Z")
    axes[1, 0].plot(y, s["L"], color="tab:green")
    axes[1, 0].set_ylabel("L")
    axes[1, 0].set_xlabel("y")
    for name, style in (("a11", "-"), ("a12", "--"), ("a22", ":")):
        axes[1, 1].plot(y, s[name], style, label=name)
    axes[1, 1].plot(y, s["P"], "-.", label="P")
    axes[1, 1].legend(fontsize=8)
    axes[1, 1].set_xlabel("y")
    for ax in axes.flat:
        ax.grid(alpha=0.3)
    fig.suptitle("stationary state")
    _save(fig, path)


def plot_spectrum(result, path):
    """Certified and uncertified roots in the complex plane."""
    fig, ax = plt.subplots(figsize=(6, 6))
    cert = [e.lam for e in result.eigenvalues if e.certified]
    rest = [e.lam for e in result.eigenvalues if not e.certified]
    if cert:
        ax.plot([z.real for z in cert], [z.imag for z in cert], "o",
                color="tab:blue", label="certified")
    if rest:
        ax.plot([z.real for z in rest], [z.imag for z in rest], "x",
                color="tab:red", label="uncertified")
    re0, re1, im0, im1 = result.search_region
    ax.add_patch(plt.Rectangle((re0, im0), re1 - re0, im1 - im0,
                               fill=False, linestyle="--", color="gray"))
    ax.set_xlabel("Re lambda")
    ax.set_ylabel("Im lambda")
    ax.grid(alpha=0.3)
    if cert or rest:
        ax.legend(fontsize=8)
    ax.set_title(f"point spectrum, omega = {result.omega:g}")
    _save(fig, path)


def plot_verification(table, path):
    """err and err*k against the mode index."""
    ks = [r.k for r in table.rows]
    errs = [r.err for r in table.rows]
    errk = [r.err_times_k for r in table.rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.semilogy(ks, errs, "o-")
    ax1.set_xlabel("k")
    ax1.set_ylabel("|lambda_num - lambda_asym|")
    ax2.plot(ks, errk, "s-", color="tab:orange")
    ax2.set_xlabel("k")
    ax2.set_ylabel("err * k")
    for ax in (ax1, ax2):
        ax.grid(alpha=0.3)
    fig.suptitle(f"asymptotic agreement, omega = {table.omega:g}")
    _save(fig, path)


def plot_sweep(header, rows, path):
    """Each sweep column against the swept value; failed rows skipped."""
    keys = header.split(",")
    arr = np.asarray(rows, dtype=float)
    ok = np.isfinite(arr[:, 1])
    fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True)
    for ax, col in zip(axes.flat, range(1, arr.shape[1])):
        ax.plot(arr[ok, 0], arr[ok, col], "o-")
        ax.set_ylabel(keys[col])
        ax.grid(alpha=0.3)
    for ax in axes[1]:
        ax.set_xlabel(keys[0])
    fig.suptitle("parameter sweep")
    _save(fig, path)
