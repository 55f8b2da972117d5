"""Iterated GMM / graph-cut foreground extraction from a bounding box.

The segmentation state couples a four-state trimap with two color mixtures.
Pixels outside the init box are sure background forever; pixels inside start
as probable foreground and flip between probable foreground/background as
cuts are applied. Each iteration runs: component assignment, mixture
re-estimation, graph construction, exact min-cut.

Energy bookkeeping: the energy reported by ``seg_energy`` uses the raw data
terms -log p(z | gmm of the pixel's label) plus the contrast-weighted
smoothness cost over label discontinuities. Graph capacities shift both
terminal links of a pixel by the same amount where a data term is negative
(densities above 1 occur for near-degenerate mixtures); the shift leaves the
optimal cut unchanged while keeping all capacities non-negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..errors import BoxTooSmall, DegenerateColors, EmptyForeground
from ..geometry import Rect, as_pixel_array
from .contour import largest_component, trace_boundary
from .gmm import GaussianMixture, fit_from_assignments, init_mixture
from .maxflow import PixelGraph, min_cut

DEFAULT_COMPONENTS = 5
DEFAULT_GAMMA = 50.0
DEFAULT_MAX_ITERS = 5
DEFAULT_REL_TOL = 1e-3
MIN_BOX_AREA = 64
VARIANCE_FLOOR = 1e-9


class Trimap(IntEnum):
    SURE_BG = 0
    SURE_FG = 1
    PROB_BG = 2
    PROB_FG = 3


@dataclass
class SegState:
    """Mutable segmentation state, confined to one segmentation task."""

    image: np.ndarray  # (H, W, 3) float64, 0..255
    box: Rect
    trimap: np.ndarray  # (H, W) uint8 of Trimap values
    fg_gmm: GaussianMixture
    bg_gmm: GaussianMixture
    component_idx: np.ndarray  # (H, W) int32, within the pixel's current side
    beta: float
    gamma: float = DEFAULT_GAMMA
    smooth_cache: dict = field(default_factory=dict, repr=False)

    @property
    def fg_mask(self) -> np.ndarray:
        return (self.trimap == Trimap.PROB_FG) | (self.trimap == Trimap.SURE_FG)


def seg_init(
    image,
    box: Rect,
    n_components: int = DEFAULT_COMPONENTS,
    gamma: float = DEFAULT_GAMMA,
) -> SegState:
    """Initialize trimap, mixtures, and contrast scale from a bounding box.

    Inside the box becomes probable foreground, outside sure background. Both
    mixtures are fitted by k-means on their region's pixels. Raises
    DegenerateColors when either region has (near-)zero color variance or the
    background region is empty, and BoxTooSmall below 64 px^2.
    """
    pixels = as_pixel_array(image).astype(np.float64)
    height, width = pixels.shape[:2]
    if not box.within(width, height):
        raise ValueError(f"box {box.as_tuple()} outside {width}x{height} image")
    if box.area < MIN_BOX_AREA:
        raise BoxTooSmall(f"box area {box.area} px^2 < {MIN_BOX_AREA} px^2")

    trimap = np.full((height, width), int(Trimap.SURE_BG), dtype=np.uint8)
    trimap[box.slices] = int(Trimap.PROB_FG)
    fg_sel = trimap == Trimap.PROB_FG
    bg_sel = ~fg_sel

    if not bg_sel.any():
        raise DegenerateColors("box covers the whole image: no background sample")
    for name, sel in (("foreground", fg_sel), ("background", bg_sel)):
        region = pixels[sel]
        if region.var(axis=0).sum() < VARIANCE_FLOOR:
            raise DegenerateColors(f"{name} region color variance below {VARIANCE_FLOOR}")

    beta = _beta_from_image(pixels)

    component_idx = np.zeros((height, width), dtype=np.int32)
    fg_gmm, fg_assign = init_mixture(pixels[fg_sel], n_components)
    bg_gmm, bg_assign = init_mixture(pixels[bg_sel], n_components)
    component_idx[fg_sel] = fg_assign
    component_idx[bg_sel] = bg_assign

    return SegState(
        image=pixels,
        box=box,
        trimap=trimap,
        fg_gmm=fg_gmm,
        bg_gmm=bg_gmm,
        component_idx=component_idx,
        beta=beta,
        gamma=gamma,
    )


def _beta_from_image(pixels: np.ndarray) -> float:
    """beta = 1 / (2 <||z_m - z_n||^2>) over all 8-neighbor pairs."""
    total = 0.0
    count = 0
    for da, db in _PAIR_SLICES:
        diff = pixels[da] - pixels[db]
        total += float((diff * diff).sum())
        count += diff.shape[0] * diff.shape[1]
    mean = total / count
    if mean <= 0.0:
        raise DegenerateColors("image has zero contrast; beta undefined")
    return 1.0 / (2.0 * mean)


# (slice pair, distance) for each of the four undirected 8-neighbor directions
_PAIR_SLICES = (
    (np.s_[:, :-1], np.s_[:, 1:]),  # horizontal
    (np.s_[:-1, :], np.s_[1:, :]),  # vertical
    (np.s_[:-1, :-1], np.s_[1:, 1:]),  # diagonal down-right
    (np.s_[:-1, 1:], np.s_[1:, :-1]),  # diagonal down-left
)
_PAIR_DISTS = (1.0, 1.0, math.sqrt(2.0), math.sqrt(2.0))


def _smoothness(state: SegState) -> list[np.ndarray]:
    """Per-direction smoothness capacities gamma exp(-beta d^2) / dist."""
    cached = state.smooth_cache.get("planes")
    if cached is not None:
        return cached
    planes = []
    for (da, db), dist in zip(_PAIR_SLICES, _PAIR_DISTS):
        diff = state.image[da] - state.image[db]
        d2 = (diff * diff).sum(axis=2)
        planes.append(state.gamma * np.exp(-state.beta * d2) / dist)
    state.smooth_cache["planes"] = planes
    return planes


def assign_components(state: SegState) -> SegState:
    """Assign every pixel the max-likelihood component of its side's GMM."""
    fg = state.fg_mask
    bg = ~fg
    if fg.any():
        state.component_idx[fg] = state.fg_gmm.assign(state.image[fg])
    if bg.any():
        state.component_idx[bg] = state.bg_gmm.assign(state.image[bg])
    return state


def learn_gmm(state: SegState) -> SegState:
    """Re-estimate both mixtures from the current assignments."""
    fg = state.fg_mask
    bg = ~fg
    k = state.fg_gmm.n_components
    if fg.any():
        state.fg_gmm, new_assign = fit_from_assignments(state.image[fg], state.component_idx[fg], k)
        state.component_idx[fg] = new_assign
    if bg.any():
        state.bg_gmm, new_assign = fit_from_assignments(state.image[bg], state.component_idx[bg], k)
        state.component_idx[bg] = new_assign
    return state


def _data_terms(state: SegState) -> tuple[np.ndarray, np.ndarray]:
    """Raw per-pixel data terms (-log mixture density) under each model."""
    height, width = state.trimap.shape
    flat = state.image.reshape(-1, 3)
    d_fg = -state.fg_gmm.log_likelihood(flat).reshape(height, width)
    d_bg = -state.bg_gmm.log_likelihood(flat).reshape(height, width)
    return d_fg, d_bg


def build_graph(state: SegState) -> PixelGraph:
    """Terminal capacities from the data terms, neighbor edges from contrast.

    Probable pixels: source (foreground-side) capacity -log p(z | bg model),
    sink capacity -log p(z | fg model), both shifted per pixel into the
    non-negative range. Sure pixels get capacity BIG on their matching
    terminal and 0 on the other, with BIG = 1 + the largest data term in the
    image so they never flip.
    """
    height, width = state.trimap.shape
    d_fg, d_bg = _data_terms(state)

    shift = np.maximum(0.0, -np.minimum(d_fg, d_bg))
    src = d_bg + shift
    snk = d_fg + shift
    big = 1.0 + max(float(src.max()), float(snk.max()))

    sure_bg = state.trimap == Trimap.SURE_BG
    sure_fg = state.trimap == Trimap.SURE_FG
    src = np.where(sure_bg, 0.0, np.where(sure_fg, big, src))
    snk = np.where(sure_fg, 0.0, np.where(sure_bg, big, snk))

    grid = np.arange(height * width, dtype=np.int64).reshape(height, width)
    planes = _smoothness(state)
    edge_a = np.concatenate([grid[da].ravel() for (da, _), _ in zip(_PAIR_SLICES, planes)])
    edge_b = np.concatenate([grid[db].ravel() for (_, db), _ in zip(_PAIR_SLICES, planes)])
    edge_cap = np.concatenate([p.ravel() for p in planes])

    return PixelGraph(
        n_nodes=height * width,
        source_cap=src.ravel(),
        sink_cap=snk.ravel(),
        edge_a=edge_a,
        edge_b=edge_b,
        edge_cap=edge_cap,
    )


def seg_energy(state: SegState) -> float:
    """Data terms of the current labeling plus smoothness across its seams."""
    fg = state.fg_mask
    d_fg, d_bg = _data_terms(state)
    energy = float(np.where(fg, d_fg, d_bg).sum())
    for (da, db), plane in zip(_PAIR_SLICES, _smoothness(state)):
        cut = fg[da] != fg[db]
        energy += float(plane[cut].sum())
    return energy


def apply_cut(state: SegState, labels: np.ndarray) -> SegState:
    """Relabel probable pixels from a cut; sure pixels never change."""
    labels2d = labels.reshape(state.trimap.shape)
    probable = (state.trimap == Trimap.PROB_FG) | (state.trimap == Trimap.PROB_BG)
    state.trimap[probable] = np.where(
        labels2d[probable], int(Trimap.PROB_FG), int(Trimap.PROB_BG)
    ).astype(np.uint8)
    return state


class GrabCut:
    """Stepwise driver exposing per-iteration energies."""

    def __init__(self, image, box: Rect, n_components: int = DEFAULT_COMPONENTS, gamma: float = DEFAULT_GAMMA):
        self.state = seg_init(image, box, n_components=n_components, gamma=gamma)
        self.energies: list[float] = []

    def step(self) -> float:
        """One assign -> learn -> build -> cut round; returns the new energy."""
        state = self.state
        assign_components(state)
        learn_gmm(state)
        graph = build_graph(state)
        _, labels = min_cut(graph)
        apply_cut(state, labels)
        if not state.fg_mask.any():
            raise EmptyForeground("cut assigned no pixel to the foreground")
        energy = seg_energy(state)
        self.energies.append(energy)
        return energy

    def run(self, max_iters: int = DEFAULT_MAX_ITERS, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
        """Iterate until the relative energy decrease drops below rel_tol."""
        if max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        previous = None
        for _ in range(max_iters):
            energy = self.step()
            if previous is not None:
                denom = abs(previous) if previous != 0.0 else 1.0
                if (previous - energy) / denom < rel_tol:
                    break
            previous = energy
        return self.state.fg_mask


def grabcut_run(
    image,
    box: Rect,
    max_iters: int = DEFAULT_MAX_ITERS,
    rel_tol: float = DEFAULT_REL_TOL,
    n_components: int = DEFAULT_COMPONENTS,
    gamma: float = DEFAULT_GAMMA,
) -> tuple[np.ndarray, np.ndarray]:
    """Segment the box contents; returns (mask, contour).

    The mask is the largest 4-connected foreground component; the contour is
    its outer boundary from Moore tracing, as (x, y) pixel coordinates.
    Raises EmptyForeground when a cut leaves no foreground at all.
    """
    driver = GrabCut(image, box, n_components=n_components, gamma=gamma)
    mask = driver.run(max_iters=max_iters, rel_tol=rel_tol)
    component = largest_component(mask)
    contour = trace_boundary(component)
    return component, contour
