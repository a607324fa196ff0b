"""HTTP API over the library: isomorphism tests, compactness, data, training.

Run with ``wlkit serve`` or ``uvicorn wlkit.service:app``. Graphs travel as
the same JSON documents the file codec uses; exact-rational witnesses are
encoded as "num/den" strings. Size-limit violations map to HTTP 413, other
invalid inputs to 400/422.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .data import (
    GENERATOR_FAMILIES,
    GenerationError,
    dataset_from_json,
    dataset_to_json,
    gen_wl_hard_pairs,
)
from .fractional import (
    LP_SIZE_LIMIT,
    POLYTOPE_SIZE_LIMIT,
    TooLargeError,
    fractional_iso_feasible,
    is_compact,
)
from .graphs import Graph, GraphError, build_graph
from .nn import ModelConfig, TrainConfig, train
from .refinement import tinhofer_test, wl_pair_test

__all__ = ["app"]


class GraphDoc(BaseModel):
    """Wire form of a graph; matches the file codec."""

    n: int = Field(ge=0)
    edges: list[tuple[int, int]] = Field(default_factory=list)
    node_labels: list[int] | None = None

    def to_graph(self) -> Graph:
        try:
            return build_graph(self.n, self.edges, self.node_labels)
        except GraphError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @staticmethod
    def from_graph(g: Graph) -> "GraphDoc":
        return GraphDoc(
            n=g.n,
            edges=[(u, v) for u, v in g.edges()],
            node_labels=list(g.node_labels) if g.node_labels is not None else None,
        )


class PairRequest(BaseModel):
    graph_a: GraphDoc
    graph_b: GraphDoc


class WlResponse(BaseModel):
    outcome: str
    rounds: int


class TinhoferResponse(BaseModel):
    outcome: str
    rounds: int
    certificate: list[int] | None
    recolor_trace: list[tuple[int, int, tuple[int, int]]]


class FracIsoRequest(PairRequest):
    limit: int = LP_SIZE_LIMIT


class FracIsoResponse(BaseModel):
    feasible: bool
    witness: list[list[str]] | None


class CompactRequest(BaseModel):
    graph: GraphDoc
    limit: int = POLYTOPE_SIZE_LIMIT


class CompactResponse(BaseModel):
    status: str
    automorphism_count: int | None
    witness: list[list[str]] | None


class GenerateRequest(BaseModel):
    family: str
    m: int = 3
    n: int = 8
    degree: int = 3
    count: int = 40
    seed: int = 0


class DatasetDoc(BaseModel):
    name: str
    num_classes: int
    labels: list[int]
    graphs: list[GraphDoc]


class TrainRequest(BaseModel):
    dataset: DatasetDoc
    layout: str = "gggrgg"
    hidden: int = Field(default=32, ge=1)
    epochs: int = Field(default=300, ge=1)
    seed: int = 0
    recolor: str = "single"  # single | half | none
    learning_rate: float = 0.01
    lr_decay: float = 0.1**0.5
    lr_period: int = 50
    batch_size: int | None = 32


class EpochMetrics(BaseModel):
    epoch: int
    loss: float
    train_accuracy: float


class TrainResponse(BaseModel):
    final_accuracy: float
    final_loss: float
    metrics: list[EpochMetrics]


app = FastAPI(
    title="wlkit",
    version=__version__,
    description="Color refinement, isomorphism testing, compactness, and "
    "recoloring-GNN training as a service.",
)


def _too_large(exc: TooLargeError) -> HTTPException:
    return HTTPException(status_code=413, detail=str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/wl", response_model=WlResponse)
def wl(req: PairRequest) -> WlResponse:
    verdict = wl_pair_test(req.graph_a.to_graph(), req.graph_b.to_graph())
    return WlResponse(outcome=verdict.outcome, rounds=verdict.rounds)


@app.post("/tinhofer", response_model=TinhoferResponse)
def tinhofer(req: PairRequest) -> TinhoferResponse:
    verdict = tinhofer_test(req.graph_a.to_graph(), req.graph_b.to_graph())
    return TinhoferResponse(
        outcome=verdict.outcome,
        rounds=verdict.rounds,
        certificate=list(verdict.certificate.mapping) if verdict.certificate else None,
        recolor_trace=list(verdict.recolor_trace),
    )


@app.post("/fractional", response_model=FracIsoResponse)
def fractional(req: FracIsoRequest) -> FracIsoResponse:
    try:
        feasible, witness = fractional_iso_feasible(
            req.graph_a.to_graph(), req.graph_b.to_graph(), size_limit=req.limit
        )
    except TooLargeError as exc:
        raise _too_large(exc) from exc
    return FracIsoResponse(
        feasible=feasible, witness=witness.to_json() if witness is not None else None
    )


@app.post("/compact", response_model=CompactResponse)
def compact(req: CompactRequest) -> CompactResponse:
    report = is_compact(req.graph.to_graph(), n_limit=req.limit)
    if report.status == "TooLarge":
        raise _too_large(
            TooLargeError(f"graph exceeds the compactness limit n <= {req.limit}")
        )
    return CompactResponse(
        status=report.status,
        automorphism_count=report.automorphism_count,
        witness=report.witness.to_json() if report.witness is not None else None,
    )


@app.post("/generate", response_model=DatasetDoc)
def generate(req: GenerateRequest) -> DatasetDoc:
    if req.family not in GENERATOR_FAMILIES:
        raise HTTPException(
            status_code=400,
            detail=f"unknown family {req.family!r}; choose from {GENERATOR_FAMILIES}",
        )
    try:
        dataset = gen_wl_hard_pairs(
            req.family,
            m=req.m,
            n=req.n,
            degree=req.degree,
            count=req.count,
            seed=req.seed,
        )
    except (ValueError, GenerationError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    doc = dataset_to_json(dataset)
    return DatasetDoc(**doc)


@app.post("/train", response_model=TrainResponse)
def train_endpoint(req: TrainRequest) -> TrainResponse:
    if req.recolor not in ("single", "half", "none"):
        raise HTTPException(status_code=400, detail=f"unknown recolor {req.recolor!r}")
    layout = req.layout.replace("r", "") if req.recolor == "none" else req.layout
    try:
        dataset = dataset_from_json(req.dataset.model_dump())
        cfg = ModelConfig(
            layout=layout,
            hidden_dim=req.hidden,
            num_classes=dataset.num_classes,
            recolor_fraction=req.recolor if req.recolor != "none" else "single",
        )
        tcfg = TrainConfig(
            epochs=req.epochs,
            learning_rate=req.learning_rate,
            lr_decay=req.lr_decay,
            lr_period=req.lr_period,
            batch_size=req.batch_size,
            seed=req.seed,
        )
        result = train(dataset, cfg, tcfg)
    except (GraphError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    rows = [
        EpochMetrics(epoch=e, loss=l, train_accuracy=a) for e, l, a in result.metrics
    ]
    return TrainResponse(
        final_accuracy=rows[-1].train_accuracy,
        final_loss=rows[-1].loss,
        metrics=rows,
    )
