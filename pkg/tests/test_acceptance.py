"""Acceptance suite: one test per release criterion.

Each test prints a `[PASS] criterion: ...` line (or `[FAIL]`) so a
plain `pytest -s tests/test_acceptance.py` reads as a checklist. Run
budgets are asserted inside the tests themselves.
"""

import functools
import json
import math
import os
import time

import numpy as np
import pytest

from gridnas import (
    CatalogConfig,
    EvolutionConfig,
    Fn,
    GridConfig,
    TensorShape,
    active_nodes,
    decode,
    effective_rate,
    evolve,
    neutral_mutation,
    phenotype_hash,
    random_genotype,
)
from gridnas.config import desk_grid, load_run_config, make_preset
from gridnas.data import desk_data
from gridnas.evaluator import evaluate
from gridnas.evolution import EvolutionRun
from gridnas.runner import execute, resume

from conftest import REFERENCE_CHAIN_SHAPES, chain_genotype, reference_chain_genotype, rng
from gradcheck import CASE_NAMES, max_relative_error
from test_genome import oracle_active
from test_evolution import Scripted, hash_fitness

DESK_SEED = 7
DESK_BUDGET_SECONDS = 600


def criterion(name):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                message = fn(*args, **kwargs)
            except BaseException:
                print(f"\n[FAIL] {name}")
                raise
            print(f"\n[PASS] {name}" + (f": {message}" if message else ""))

        return run

    return wrap


# ---------------------------------------------------------------- shared desk run

@pytest.fixture(scope="session")
def desk_run(tmp_path_factory):
    """The canonical desk search, shared by the end-to-end criteria."""
    out = str(tmp_path_factory.mktemp("desk_run_a"))
    cfg = make_preset("desk", seed=DESK_SEED, output_dir=out)
    outcome = execute(cfg)
    return cfg, outcome


# ---------------------------------------------------------------- criteria

@criterion("reference architecture decodes to the published shape chain")
def test_reference_shape_chain():
    graph = decode(reference_chain_genotype(), CatalogConfig(), TensorShape(8, 400, 300))
    got = [(node.function.value, tuple(node.out_shape)) for node in graph.nodes]
    assert got == REFERENCE_CHAIN_SHAPES
    assert graph.input_shape == TensorShape(8, 400, 300)
    return "11 nodes, 300->...->16"


@criterion("active set matches the brute-force oracle on 1000 genotypes in <10s")
def test_active_set_oracle_thousand():
    grid = GridConfig(rows=5, cols=20, levels_back=3)
    catalog = CatalogConfig()
    started = time.perf_counter()
    for seed in range(1000):
        g = random_genotype(grid, catalog, rng(seed))
        assert active_nodes(g) == oracle_active(g)
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    return f"{elapsed:.2f}s"


@criterion("neutral mutation preserves the phenotype hash in 1000 trials and costs no evaluations")
def test_neutral_invariance_thousand():
    grid = GridConfig(rows=5, cols=20, levels_back=3, active_min=10, active_max=60)
    catalog = CatalogConfig()
    evo_cfg = EvolutionConfig(seed=0)
    r = rng(123)
    for seed in range(1000):
        g = random_genotype(grid, catalog, rng(seed))
        generation = int(r.integers(evo_cfg.max_generation))
        mutated = neutral_mutation(g, evo_cfg, generation, r)
        assert phenotype_hash(mutated) == phenotype_hash(g)

    # every generation neutral: call count stays at initialization + lambda per step
    cfg = EvolutionConfig(seed=5, max_generation=25)
    evaluator = Scripted(1.0, [[0.0, 0.0, 0.0, 0.0]])
    reports = []
    evolve(cfg, desk_grid(), catalog, evaluator, observer=reports.append)
    assert all(r.neutral_step for r in reports)
    assert evaluator.calls == 1 + cfg.lam * cfg.max_generation
    return "0 violations, 0 extra calls"


@criterion("analytic gradients match central differences (eps=1e-5, rel<1e-4, 20 configs/op, <60s)")
def test_gradient_checks():
    started = time.perf_counter()
    worst = {}
    for name in CASE_NAMES:
        worst[name] = max(max_relative_error(name, seed) for seed in range(20))
        assert worst[name] < 1e-4, f"{name}: {worst[name]:.3e}"
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    peak = max(worst, key=worst.get)
    return f"worst {worst[peak]:.2e} ({peak}), {elapsed:.1f}s"


@criterion("selection semantics: monotone parent, neutral iff strictly worse, ties to lowest index, rate schedule")
def test_es_semantics():
    # (a) parent fitness non-decreasing over 200 generations, deterministic evaluator
    cfg = EvolutionConfig(seed=11, max_generation=200)
    reports = []
    run = EvolutionRun(cfg, desk_grid(), CatalogConfig(), hash_fitness, observer=reports.append)
    run.initialize()
    pre_parent = [run.parent_fitness]  # fitness of the parent entering each generation
    while not run.finished:
        run.step()
        pre_parent.append(run.parent_fitness)
    fits = [rec["parent_fitness"] for rec in run.history]
    assert len(fits) == 200
    assert all(b >= a for a, b in zip(fits, fits[1:]))

    # (b) a neutral step happened exactly when every offspring was strictly worse
    neutrals = 0
    for report in reports:
        strictly_worse = all(o.fitness < pre_parent[report.generation] for o in report.offspring)
        assert report.neutral_step == strictly_worse
        neutrals += report.neutral_step
    assert 0 < neutrals < 200  # both branches exercised

    # (c) ties promote the lowest offspring index
    tie_reports = []
    evolve(
        EvolutionConfig(seed=12, max_generation=6),
        desk_grid(),
        CatalogConfig(),
        Scripted(0.5, [[0.7, 0.9, 0.9, 0.8]]),
        observer=tie_reports.append,
    )
    assert all(r.selected_index == 1 for r in tie_reports)

    # (d) the rate schedule steps once, at ceil(0.75 * max_generation)
    paper = EvolutionConfig()
    threshold = math.ceil(0.75 * paper.max_generation)
    assert threshold == 750
    for gen in range(0, threshold):
        assert (effective_rate(paper, gen, Fn.CONV), effective_rate(paper, gen, Fn.SUM)) == (0.1, 0.2)
    for gen in range(threshold, paper.max_generation):
        rates = (effective_rate(paper, gen, Fn.CONV), effective_rate(paper, gen, Fn.SUM))
        assert rates == (pytest.approx(0.2), pytest.approx(0.4))
    return f"{neutrals} neutral steps over 200 generations"


@criterion("desk search: <=10min, best >=0.90, beats the identity baseline by >=0.05")
def test_desk_search_end_to_end(desk_run):
    cfg, outcome = desk_run
    assert outcome.completed and outcome.generations == 30
    assert outcome.wall_seconds <= DESK_BUDGET_SECONDS
    assert outcome.best_fitness >= 0.90

    data_cfg = desk_data(seed=DESK_SEED, source="synthetic_ngram")
    identity = chain_genotype(GridConfig(3, 8, 3), [], output=0)
    shape = TensorShape(data_cfg.batch_size, data_cfg.max_len, data_cfg.embed_dim)
    baseline = evaluate(decode(identity, CatalogConfig(), shape), data_cfg).fitness
    assert outcome.best_fitness >= baseline + 0.05
    return (
        f"best {outcome.best_fitness:.4f} vs identity {baseline:.4f} "
        f"in {outcome.wall_seconds:.1f}s"
    )


@criterion("determinism: identical reruns and a gen-15 interrupt/resume are byte-identical")
def test_desk_search_determinism(desk_run, tmp_path):
    cfg_a, _ = desk_run
    read = lambda d, name: open(os.path.join(d, name), "rb").read()

    out_b = str(tmp_path / "run_b")
    cfg_b = make_preset("desk", seed=DESK_SEED, output_dir=out_b)
    execute(cfg_b)
    assert read(out_b, "history.jsonl") == read(cfg_a.output_dir, "history.jsonl")
    assert read(out_b, "best_genotype.json") == read(cfg_a.output_dir, "best_genotype.json")

    out_c = str(tmp_path / "run_c")
    cfg_c = make_preset("desk", seed=DESK_SEED, output_dir=out_c)
    execute(cfg_c, stop_after=15)
    assert len(open(os.path.join(out_c, "history.jsonl")).readlines()) == 15
    resume(os.path.join(out_c, "checkpoint.json"))
    assert read(out_c, "history.jsonl") == read(cfg_a.output_dir, "history.jsonl")
    assert read(out_c, "best_genotype.json") == read(cfg_a.output_dir, "best_genotype.json")
    return "rerun and split-resume both byte-identical"


@criterion("ablation searches complete and contain no excluded functions")
def test_ablation_analog(desk_run, tmp_path):
    cfg_a, outcome_a = desk_run
    removed = {
        "full": set(),
        "s_no_conv": {"conv"},
        "s_no_atte": {"atte"},
        "s_no_conv_atte": {"conv", "atte"},
    }
    table = {"full": (outcome_a.best_fitness, cfg_a.output_dir)}
    for preset in ("s_no_conv", "s_no_atte", "s_no_conv_atte"):
        out = str(tmp_path / preset)
        cfg = load_run_config(preset="desk", seed=DESK_SEED, output_dir=out, catalog_preset=preset)
        outcome = execute(cfg)
        assert outcome.completed
        table[preset] = (outcome.best_fitness, out)
    lines = ["", "catalog          best_fitness"]
    for preset, (fitness, out) in table.items():
        graph = json.load(open(os.path.join(out, "best_graph.json")))
        used = {node["fn"] for node in graph["nodes"]}
        assert not (used & removed[preset]), f"{preset} produced {used & removed[preset]}"
        lines.append(f"{preset:16s} {fitness:.4f}")
    print("\n".join(lines))
    return "4 searches, catalog restrictions respected"
