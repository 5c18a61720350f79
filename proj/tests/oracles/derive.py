"""Independent oracles for values frozen into the C++ unit tests.

Run: python3 tests/oracles/derive.py
"""
import itertools
import math

import numpy as np
import sympy as sp


def show(name, value):
    print(f"{name} = {value!r}")


# Boltzmann assignment, z=0, P={1,2}, T=1
q1 = sp.exp(-1) / (sp.exp(-1) + sp.exp(-4))
show("assign_q1", float(q1))

# dL_q/dT at the same point: L_q(T) = sum_k q_k(T) d_k
T = sp.symbols("T", positive=True)
d = [1, 4]
w = [sp.exp(-dk / T) for dk in d]
Lq = sum(wk * dk for wk, dk in zip(w, d)) / sum(w)
show("dLq_dT_at_1", float(sp.diff(Lq, T).subs(T, 1)))

# layer norm of [0,2,4] with gain 1 bias 5, eps 1e-5
x = np.array([0.0, 2.0, 4.0])
show("layer_norm", list(5 + (x - 2) / math.sqrt(8 / 3 + 1e-5)))

# entropy of [0.25, 0.75]
show("entropy", -(0.25 * math.log(0.25) + 0.75 * math.log(0.75)))

# anneal T0=2, tau=20, epoch 20
show("anneal_20", 2 * math.exp(-1))

# Kepler periods
mu = 398600.4418
for a in (42164.0, 7200.0):
    show(f"period_{int(a)}", 2 * math.pi * math.sqrt(a**3 / mu))

# 1D Hessian of L_q (mean over tokens) w.r.t. two prototypes
zs = [-2, -1, 1, 2]
p1, p2 = sp.symbols("p1 p2", real=True)
Tv = sp.Rational(1)
terms = []
for z in zs:
    d1, d2 = (z - p1) ** 2, (z - p2) ** 2
    e1, e2 = sp.exp(-d1 / Tv), sp.exp(-d2 / Tv)
    terms.append((e1 * d1 + e2 * d2) / (e1 + e2))
L = sum(terms) / len(zs)
H = sp.hessian(L, (p1, p2)).subs({p1: -sp.Rational(3, 2), p2: sp.Rational(3, 2)})
show("hessian_1d", [[float(H[i, j]) for j in range(2)] for i in range(2)])


# Hungarian accuracy by exhaustive matching
def best_acc(pred, truth):
    labels = sorted(set(pred) | set(truth))
    best = 0
    for perm in itertools.permutations(labels):
        m = dict(zip(labels, perm))
        best = max(best, sum(m[p] == t for p, t in zip(pred, truth)))
    return best / len(pred)


show("acc_4pt", best_acc([0, 0, 1, 1], [0, 1, 0, 0]))


# 4-point clustering cases, exhaustive pair counting
def ari_pairs(pred, truth):
    pairs = list(itertools.combinations(range(len(pred)), 2))
    a = sum(1 for i, j in pairs if pred[i] == pred[j] and truth[i] == truth[j])
    same_p = sum(1 for i, j in pairs if pred[i] == pred[j])
    same_t = sum(1 for i, j in pairs if truth[i] == truth[j])
    expected = same_p * same_t / len(pairs)
    return (a - expected) / ((same_p + same_t) / 2 - expected)


show("ari_4pt", ari_pairs([0, 0, 1, 1], [0, 0, 0, 1]))
show("ari_4pt_b", ari_pairs([0, 0, 1, 2], [0, 0, 1, 1]))
pred = [0, 0, 1, 1]
truth = [0, 0, 0, 1]


def H_of(labels):
    N = len(labels)
    return -sum(labels.count(c) / N * math.log(labels.count(c) / N) for c in set(labels))


N = 4
mi = 0.0
for cp in set(pred):
    for ct in set(truth):
        nij = sum(1 for i in range(N) if pred[i] == cp and truth[i] == ct)
        if nij:
            mi += nij / N * math.log(N * nij / (pred.count(cp) * truth.count(ct)))
show("nmi_4pt_geometric", mi / math.sqrt(H_of(pred) * H_of(truth)))

# forward pass on a fixed 3x4 case, K=2, T=0.7
Z = np.array([[0.1, -0.4, 0.3, 0.9], [1.2, 0.5, -0.7, 0.0], [-0.3, 0.8, 0.2, -1.1]])
P = np.array([[0.5, 0.0, -0.2, 0.4], [-0.6, 0.7, 0.1, -0.5]])
WO = np.array([[0.2, -0.1, 0.0, 0.3], [0.05, 0.4, -0.2, 0.1], [0.0, 0.1, 0.5, -0.3], [0.3, 0.0, 0.1, 0.2]])
g = np.array([1.0, 0.5, 2.0, 1.5])
b = np.array([0.0, 0.1, -0.2, 0.3])
D = ((Z[:, None, :] - P[None, :, :]) ** 2).sum(-1)
Qf = np.exp(-D / 0.7)
Qf /= Qf.sum(1, keepdims=True)
M = Qf @ P
pre = Z + M @ WO.T
ln = (pre - pre.mean(1, keepdims=True)) / np.sqrt(pre.var(1, keepdims=True) + 1e-5)
show("forward_H", (ln * g + b).tolist())
