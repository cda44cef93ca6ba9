"""Norm-bounded tree networks and their random-restart training loop.

The class is defined recursively: depth 1 holds linear maps x -> <w, x>
with ||w||_p <= B; at depth m, outputs of depth m-1 members pass through
a bounded odd activation and are combined linearly under an l1 budget B.
Training draws a fresh candidate per round (random targets fitted by
constrained least squares, leaves first) and keeps the best after
optional joint local refinement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .data import draw_batch
from .losses import empirical_risk
from .solvers import constrained_least_squares, monotone_descent, project, project_l1
from .util import ceil_big_product, dual_exponent, lq_norm, round_rng

_NORM_TOL = 1e-9
_ERF_SCALE = math.sqrt(math.pi) / 2.0


@dataclass(frozen=True)
class Activation:
    """Odd, 1-Lipschitz squashing function with range inside [-1, 1]."""

    name: str

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.name == "tanh":
            return np.tanh(x)
        if self.name == "erf":
            # plain erf has slope 2/sqrt(pi) at 0; rescale to unit slope
            return erf(_ERF_SCALE * x)
        if self.name == "clamp":
            return np.clip(x, -1.0, 1.0)
        raise ValueError(f"unknown activation {self.name!r}")

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        if self.name == "tanh":
            t = np.tanh(x)
            return 1.0 - t * t
        if self.name == "erf":
            return np.exp(-(_ERF_SCALE * x) ** 2)
        if self.name == "clamp":
            return (np.abs(x) < 1.0).astype(float)
        raise ValueError(f"unknown activation {self.name!r}")


ACTIVATIONS = ("tanh", "erf", "clamp")


@dataclass(frozen=True)
class NetworkClassSpec:
    """Class parameters: depth, norm budget, leaf/input exponents, activation.

    leaf_p in (1, 2] bounds leaf weights; input_q is its dual and bounds
    the data (||x||_q <= 1); budget >= 1 caps every weight-vector norm.
    """

    depth: int
    budget: float
    leaf_p: float
    input_q: float
    activation: str

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.budget < 1.0:
            raise ValueError("budget must be >= 1")
        if not (1.0 < self.leaf_p <= 2.0):
            raise ValueError("leaf_p must be in (1, 2]")
        if abs(1.0 / self.leaf_p + 1.0 / self.input_q - 1.0) > 1e-9:
            raise ValueError("input_q must be the dual exponent of leaf_p")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")

    @property
    def act(self) -> Activation:
        return Activation(self.activation)


def network_spec(depth: int, budget: float, leaf_p: float = 2.0,
                 activation: str = "tanh") -> NetworkClassSpec:
    return NetworkClassSpec(depth, float(budget), float(leaf_p),
                            dual_exponent(leaf_p), activation)


@dataclass(frozen=True)
class Leaf:
    """Linear map x -> <w, x>."""

    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.ascontiguousarray(self.w, dtype=float))


@dataclass(frozen=True)
class Node:
    """Linear combination of activated child outputs."""

    children: tuple
    comb_weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(
            self, "comb_weights", np.ascontiguousarray(self.comb_weights, dtype=float)
        )


def depth(net) -> int:
    if isinstance(net, Leaf):
        return 1
    return 1 + max(depth(c) for c in net.children)


def validate(net, spec: NetworkClassSpec) -> None:
    """Raise ValueError unless every weight budget and the depth hold."""

    def walk(sub, path):
        if isinstance(sub, Leaf):
            if sub.w.ndim != 1 or sub.w.size < 1:
                raise ValueError(f"{path}: leaf weights must be a nonempty vector")
            if not np.all(np.isfinite(sub.w)):
                raise ValueError(f"{path}: leaf weights must be finite")
            norm = float(lq_norm(sub.w, spec.leaf_p))
            if norm > spec.budget + _NORM_TOL:
                raise ValueError(
                    f"{path}: ||w||_{spec.leaf_p} = {norm} exceeds budget {spec.budget}"
                )
            return
        if not isinstance(sub, Node):
            raise ValueError(f"{path}: not a Leaf or Node")
        if len(sub.children) < 1 or len(sub.children) != sub.comb_weights.size:
            raise ValueError(f"{path}: children/weights length mismatch")
        if not np.all(np.isfinite(sub.comb_weights)):
            raise ValueError(f"{path}: combination weights must be finite")
        norm = float(np.sum(np.abs(sub.comb_weights)))
        if norm > spec.budget + _NORM_TOL:
            raise ValueError(
                f"{path}: ||comb||_1 = {norm} exceeds budget {spec.budget}"
            )
        for i, child in enumerate(sub.children):
            walk(child, f"{path}.children[{i}]")

    walk(net, "net")
    if depth(net) > spec.depth:
        raise ValueError(f"network depth {depth(net)} exceeds class depth {spec.depth}")


def evaluate(net, spec: NetworkClassSpec, x):
    """Network value at a point (1-D input) or per row of a matrix."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    act = spec.act

    def walk(sub):
        if isinstance(sub, Leaf):
            return X @ sub.w
        vals = np.stack([act.value(walk(c)) for c in sub.children], axis=1)
        return vals @ sub.comb_weights

    out = walk(net)
    return float(out[0]) if single else out


def predictor(net, spec: NetworkClassSpec):
    """Vectorized callable suitable for the risk functions."""
    return lambda X: evaluate(net, spec, X)


def net_to_dict(net) -> dict:
    if isinstance(net, Leaf):
        return {"type": "leaf", "w": [float(v) for v in net.w]}
    return {
        "type": "node",
        "weights": [float(v) for v in net.comb_weights],
        "children": [net_to_dict(c) for c in net.children],
    }


def net_from_dict(obj: dict):
    if obj["type"] == "leaf":
        return Leaf(np.asarray(obj["w"], dtype=float))
    if obj["type"] == "node":
        children = tuple(net_from_dict(c) for c in obj["children"])
        return Node(children, np.asarray(obj["weights"], dtype=float))
    raise ValueError(f"unknown node type {obj.get('type')!r}")


def save_network(path, net) -> None:
    """JSON tree; float repr round-trips exactly."""
    with open(path, "w") as fh:
        json.dump(net_to_dict(net), fh)
        fh.write("\n")


def load_network(path):
    with open(path) as fh:
        return net_from_dict(json.load(fh))


def config_alg3(q: float, epsilon: float, delta: float, m: int):
    """Per-round sample size k, width s, and the round count T_theory.

    k = ceil(q / eps^2), s = ceil(1 / eps^2),
    T = ceil(5 * (4/eps)^(k*(s^m - 1)/(s - 1)) * ln(1/delta)).
    """
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must be in (0, 1)")
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (2.0 <= q < math.inf):
        raise ValueError("q must be finite and >= 2")
    k = max(1, math.ceil(q / epsilon**2))
    s = max(1, math.ceil(1.0 / epsilon**2))
    levels = m if s == 1 else (s**m - 1) // (s - 1)
    T_theory = ceil_big_product(5.0, 4.0 / epsilon, k * levels, math.log(1.0 / delta))
    return k, s, T_theory


def _generate(X: np.ndarray, spec: NetworkClassSpec, level: int, s: int,
              rng: np.random.Generator):
    """One random candidate on a fixed batch.

    Randomness is consumed depth-first: children are generated before the
    node's target vector u is drawn, so a given (seed, structure) pair
    always yields the same candidate.
    """
    k = X.shape[0]
    B = spec.budget
    if level == 1:
        u = rng.uniform(-B, B, size=k)
        w = constrained_least_squares(X, u, spec.leaf_p, B)
        return Leaf(w)
    children = [_generate(X, spec, level - 1, s, rng) for _ in range(s)]
    act = spec.act
    design = np.stack(
        [act.value(evaluate(c, spec, X)) for c in children], axis=1
    )
    u = rng.uniform(-B, B, size=k)
    c = constrained_least_squares(design, u, 1.0, B)
    return Node(tuple(children), c)


def generate_candidate(batch, spec: NetworkClassSpec, level: int, s: int, seed: int):
    """Random candidate of the given depth fitted to uniform targets."""
    if level < 1 or level > spec.depth:
        raise ValueError("level must be in [1, class depth]")
    if s < 1:
        raise ValueError("s must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return _generate(np.asarray(batch.features, dtype=float), spec, level, s, rng)


def _flatten(net) -> np.ndarray:
    parts = []

    def walk(sub):
        if isinstance(sub, Leaf):
            parts.append(sub.w)
            return
        parts.append(sub.comb_weights)
        for c in sub.children:
            walk(c)

    walk(net)
    return np.concatenate(parts)


def _rebuild(template, vec: np.ndarray):
    # node weights are consumed before children, matching _flatten
    pos = 0

    def walk(sub):
        nonlocal pos
        if isinstance(sub, Leaf):
            w = vec[pos:pos + sub.w.size].copy()
            pos += sub.w.size
            return Leaf(w)
        c = vec[pos:pos + sub.comb_weights.size].copy()
        pos += sub.comb_weights.size
        children = tuple(walk(ch) for ch in sub.children)
        return Node(children, c)

    out = walk(template)
    if pos != vec.size:
        raise ValueError("parameter vector length mismatch")
    return out


def _project_slices(template, spec: NetworkClassSpec):
    """Per-level projection applied to the flat parameter vector."""
    specs = []

    def walk(sub, pos):
        if isinstance(sub, Leaf):
            specs.append(("leaf", pos, pos + sub.w.size))
            return pos + sub.w.size
        specs.append(("node", pos, pos + sub.comb_weights.size))
        pos += sub.comb_weights.size
        for c in sub.children:
            pos = walk(c, pos)
        return pos

    walk(template, 0)

    def project_fn(vec):
        out = vec.copy()
        for kind, a, b in specs:
            if kind == "leaf":
                out[a:b] = project(out[a:b], spec.leaf_p, spec.budget)
            else:
                out[a:b] = project_l1(out[a:b], spec.budget)
        return out

    return project_fn


def _forward(net, spec: NetworkClassSpec, X: np.ndarray):
    act = spec.act
    if isinstance(net, Leaf):
        return X @ net.w, None
    child_out = [_forward(c, spec, X) for c in net.children]
    raw = np.stack([v for v, _ in child_out], axis=1)
    A = act.value(raw)
    return A @ net.comb_weights, (child_out, raw, A)


def _backward(net, spec: NetworkClassSpec, X: np.ndarray, cache, gout, grads: list):
    act = spec.act
    if isinstance(net, Leaf):
        grads.append(X.T @ gout)
        return
    child_out, raw, A = cache
    grads.append(A.T @ gout)
    for l, child in enumerate(net.children):
        gchild = gout * net.comb_weights[l] * act.deriv(raw[:, l])
        _backward(child, spec, X, child_out[l][1], gchild, grads)


def refine_network(net, spec: NetworkClassSpec, data, loss, step_budget: int):
    """Joint monotone projected descent over all weights of the tree."""
    X, y, a = data.features, data.labels, data.weights
    x0 = _flatten(net)
    project_fn = _project_slices(net, spec)

    def risk_fn(vec):
        cand = _rebuild(net, vec)
        vals, _ = _forward(cand, spec, X)
        return float(a @ loss.value(-y * vals))

    def grad_fn(vec):
        cand = _rebuild(net, vec)
        vals, cache = _forward(cand, spec, X)
        gout = a * loss.grad(-y * vals) * (-y)
        grads: list = []
        _backward(cand, spec, X, cache, gout, grads)
        return np.concatenate(grads)

    vec, _ = monotone_descent(x0, risk_fn, grad_fn, project_fn, step_budget)
    return _rebuild(net, vec)


def algorithm3(
    data,
    loss,
    spec: NetworkClassSpec,
    epsilon: float,
    delta: float,
    T_budget: int,
    refine_budget: int,
    seed: int,
    k: int | None = None,
    s: int | None = None,
):
    """Best-of-T random candidates, each optionally refined.

    Each round draws k points by importance weight, builds a candidate of
    the class depth (leaves fitted to uniform targets, then each level's
    combination weights), refines it, and scores it on the full sample;
    the earliest best round wins.  Runs min(T_theory, T_budget) rounds.
    """
    if T_budget < 1:
        raise ValueError("T_budget must be >= 1")
    norms = lq_norm(data.features, spec.input_q)
    if np.max(norms) > 1.0 + _NORM_TOL:
        raise ValueError(f"data must satisfy ||x||_{spec.input_q} <= 1")
    k_cfg, s_cfg, T_theory = config_alg3(spec.input_q, epsilon, delta, spec.depth)
    k = k_cfg if k is None else int(k)
    s = s_cfg if s is None else int(s)
    if k < 1 or s < 1:
        raise ValueError("k and s must be >= 1")
    T_run = min(T_budget, T_theory)
    best_net, best_risk = None, math.inf
    for t in range(T_run):
        rng = round_rng(seed, t)
        batch = draw_batch(rng, data, k)
        net = _generate(batch.features, spec, spec.depth, s, rng)
        if refine_budget > 0:
            net = refine_network(net, spec, data, loss, refine_budget)
        risk = empirical_risk(predictor(net, spec), loss, data)
        if risk < best_risk:
            best_net, best_risk = net, risk
    return best_net


def random_network(spec: NetworkClassSpec, dim: int, width: int, seed: int):
    """Random class member with every norm at the budget (test fixture)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    B = spec.budget

    def build(level):
        if level == 1:
            v = rng.standard_normal(dim)
            return Leaf(v * (B / lq_norm(v, spec.leaf_p)))
        children = tuple(build(level - 1) for _ in range(width))
        c = rng.standard_normal(width)
        return Node(children, c * (B / np.sum(np.abs(c))))

    return build(spec.depth)


def zero_network(dim: int):
    """The zero function as a depth-1 member."""
    return Leaf(np.zeros(dim))
