"""Built-in experiment specs."""

from __future__ import annotations

from dataclasses import dataclass

from .config import ExperimentSpec, parse_spec_text


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str
    anchor: str
    text: str

    def spec(self) -> ExperimentSpec:
        return parse_spec_text(self.text, f"builtin:{self.name}")


def _spec(name: str, kind: str, ladder: str, **params) -> str:
    lines = ["[experiment]", f"name = {name}", f"kind = {kind}", f"ladder = {ladder}", f"output_dir = runs/{name}", "",
             "[parameters]"]
    lines += [f"{k} = {v}" for k, v in params.items()]
    return "\n".join(lines) + "\n"


BUILTINS: list[CatalogEntry] = [
    CatalogEntry(
        "hs-negative",
        "helson-szego-ladder",
        "power-weight eigenbasis with negative exponent: lower Riesz bound holds, upper bound grows",
        _spec("hs-negative", "helson-szego-ladder", "16, 32, 64, 128", alpha=-0.25),
    ),
    CatalogEntry(
        "hs-positive",
        "helson-szego-ladder",
        "power-weight eigenbasis with positive exponent: upper Riesz bound holds, lower bound decays",
        _spec("hs-positive", "helson-szego-ladder", "16, 32, 64, 128", alpha=0.25),
    ),
    CatalogEntry(
        "noest-blocks",
        "example-noest",
        "two-by-two block eigenbasis with unbounded skew projections yet bounded powers",
        _spec("noest-blocks", "example-noest", "64, 128, 256", c_power=0.5),
    ),
    CatalogEntry(
        "model-space-pair",
        "model-space-pair",
        "rank-one perturbation of the shift quasisimilar to it through model-space multipliers",
        _spec("model-space-pair", "model-space-pair", "48, 64, 96", atoms=3, seed=7),
    ),
    CatalogEntry(
        "weighted-shift-suite",
        "weighted-shift-suite",
        "weighted bilateral shift eigenvectors of the restricted inverse and the quasianalytic weight dichotomy",
        _spec("weighted-shift-suite", "weighted-shift-suite", "64, 96, 128", beta=1.0, alpha=0.5),
    ),
    CatalogEntry(
        "block-gram",
        "block-gram",
        "Gram-limit components of the block contraction built from a quasianalytic and a regular weight",
        _spec("block-gram", "block-gram", "64, 96, 128", c=0.5),
    ),
    CatalogEntry(
        "dirac-accumulating",
        "dirac-example",
        "atomic Clark measures accumulating at one with a Lipschitz density ratio",
        _spec("dirac-accumulating", "dirac-example", "4, 6, 8"),
    ),
]


def list_experiments() -> list[CatalogEntry]:
    return list(BUILTINS)


def get(name: str) -> CatalogEntry | None:
    return next((e for e in BUILTINS if e.name == name), None)


def render_catalog() -> str:
    width = max(len(e.name) for e in BUILTINS)
    return "".join(f"{e.name:<{width}}  {e.kind:<22}  {e.anchor}\n" for e in BUILTINS)
