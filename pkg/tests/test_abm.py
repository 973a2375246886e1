import json
import math

import numpy as np
import pytest

from txnforge.abm import (
    AgentTypeParams,
    Label,
    ModelConfig,
    ModelKind,
    PartnerSelection,
    derive_agent_seed,
    load_config,
    paper_config,
    run,
    run_graph,
    run_simple,
)
from txnforge.errors import ConfigError
from txnforge.io_export import transactions_csv
from txnforge.schedule import build_prob_table


def _bernoulli_bounds(n_agents, rate, mean_hour):
    p = build_prob_table(mean_hour, rate).txn_prob
    mean = n_agents * p.sum()
    sd = math.sqrt(n_agents * np.sum(p * (1 - p)))
    return mean - 4 * sd, mean + 4 * sd


def test_agent_seed_determinism_and_separation():
    assert derive_agent_seed(42, 0) == derive_agent_seed(42, 0)
    assert derive_agent_seed(42, 0) != derive_agent_seed(42, 1)
    seeds = {derive_agent_seed(42, i) for i in range(5000)}
    assert len(seeds) == 5000
    assert all(0 <= s < 2**64 for s in seeds)


def test_runs_are_byte_identical():
    a = run(paper_config("graph", seed=42))
    b = run(paper_config("graph", seed=42))
    assert transactions_csv(a) == transactions_csv(b)
    assert a == b


def test_different_seed_differs():
    assert run(paper_config("graph", seed=1)).events != run(paper_config("graph", seed=2)).events


def test_simple_events_have_no_receiver(simple_run):
    assert all(e.receiver_id is None and e.amount is None for e in simple_run.events)


def test_graph_events_have_receiver(graph_run):
    assert all(e.receiver_id is not None and e.amount is not None for e in graph_run.events)


def test_event_order(simple_run, graph_run):
    for r in (simple_run, graph_run):
        keys = [(e.step, e.sender_id) for e in r.events]
        assert keys == sorted(keys)


def test_label_consistency_and_closure(graph_run):
    ids = {i for i, _ in graph_run.agents}
    for e in graph_run.events:
        assert e.sender_label is graph_run.label_of(e.sender_id)
        assert e.receiver_id in ids


def test_count_concentration(simple_run):
    n_norm = sum(1 for e in simple_run.events if e.sender_label is Label.NORMAL)
    n_susp = len(simple_run.events) - n_norm
    lo, hi = _bernoulli_bounds(1000, 4, 12)
    assert lo <= n_norm <= hi
    lo, hi = _bernoulli_bounds(10, 10, 22)
    assert lo <= n_susp <= hi


def test_suspicious_events_near_ten_pm(simple_run):
    steps = np.array([e.step for e in simple_run.events if e.sender_label is Label.SUSPICIOUS])
    # circular distance to step 88
    dist = np.minimum(abs(steps - 88), 96 - abs(steps - 88))
    assert np.median(dist) < 10


@pytest.mark.parametrize("n_susp", [100, 10, 1])
def test_ratio_sweep_scales_linearly(n_susp):
    cfg = ModelConfig(model_kind="simple", n_normal=1000, n_suspicious=n_susp, seed=42)
    r = run_simple(cfg)
    count = sum(1 for e in r.events if e.sender_label is Label.SUSPICIOUS)
    lo, hi = _bernoulli_bounds(n_susp, 10, 22)
    assert lo <= count <= hi


def test_empty_population():
    with pytest.raises(ConfigError):
        ModelConfig(model_kind="simple", n_normal=0, n_suspicious=0)


def test_zero_rate_no_events():
    cfg = ModelConfig(
        model_kind="simple", n_normal=1, n_suspicious=0,
        normal_params=AgentTypeParams("normal", 12.0, mean_num_txns=0.0),
    )
    assert run_simple(cfg).events == ()


def test_pure_same_type_routing():
    cfg = paper_config("graph").with_overrides(
        normal_params=AgentTypeParams("normal", 12.0, 4.0, pair_prob_same_type=1.0),
        suspicious_params=AgentTypeParams("suspicious", 22.0, 10.0, pair_prob_same_type=1.0),
    )
    r = run_graph(cfg)
    assert all(r.label_of(e.receiver_id) is e.sender_label for e in r.events)


def test_constant_amounts():
    cfg = paper_config("graph").with_overrides(
        normal_params=AgentTypeParams("normal", 12.0, 4.0, amount_std=0.0),
        suspicious_params=AgentTypeParams("suspicious", 22.0, 10.0, amount_std=0.0, pair_prob_same_type=0.7),
    )
    assert {e.amount for e in run_graph(cfg).events} == {20.0}


def test_amounts_truncated_at_one_cent():
    cfg = ModelConfig(
        n_normal=50, n_suspicious=0, seed=3,
        normal_params=AgentTypeParams("normal", 12.0, 20.0, amount_mean=0.0, amount_std=1.0, pair_prob_same_type=1.0),
    )
    amounts = [e.amount for e in run_graph(cfg).events]
    assert amounts and min(amounts) >= 0.01
    assert all(round(a, 2) == a for a in amounts)


def test_at_most_one_event_per_agent_step():
    r = run(paper_config("graph", seed=5))
    keys = [(e.sender_id, e.step) for e in r.events]
    assert len(keys) == len(set(keys))


def test_routing_to_empty_population_rejected():
    with pytest.raises(ConfigError):
        ModelConfig(model_kind="graph", n_normal=10, n_suspicious=0)
    # fully self-routed normals with no suspicious agents is fine
    ModelConfig(
        model_kind="graph", n_normal=10, n_suspicious=0,
        normal_params=AgentTypeParams("normal", 12.0, pair_prob_same_type=1.0),
    )


def test_uniform_partner_variant():
    cfg = paper_config("graph").with_overrides(partner_selection=PartnerSelection.UNIFORM)
    r = run_graph(cfg)
    susp_recv = sum(1 for e in r.events if r.label_of(e.receiver_id) is Label.SUSPICIOUS)
    # 10 of 1010 agents: about 1% of receivers
    assert susp_recv / len(r.events) < 0.03


def test_wrong_model_kind():
    with pytest.raises(ConfigError):
        run_simple(paper_config("graph"))
    with pytest.raises(ConfigError):
        run_graph(paper_config("simple"))


def test_fixed_grid_enforced():
    with pytest.raises(ConfigError):
        ModelConfig(steps=48)
    with pytest.raises(ConfigError):
        ModelConfig(minutes_per_step=30)


def test_bad_params():
    with pytest.raises(ConfigError):
        AgentTypeParams("normal", 12.0, pair_prob_same_type=1.5)
    with pytest.raises(ConfigError):
        AgentTypeParams("normal", 12.0, amount_std=-1.0)


def test_config_round_trip_json(tmp_path):
    cfg = paper_config("graph", seed=7)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg


def test_config_unknown_keys(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n_normal": 5, "colour": "red"}))
    with pytest.raises(ConfigError, match="colour"):
        load_config(path)
    path.write_text(json.dumps({"normal_params": {"mean_hour": 3, "bogus": 1}}))
    with pytest.raises(ConfigError, match="bogus"):
        load_config(path)


def test_config_toml(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('model_kind = "simple"\nn_normal = 3\nn_suspicious = 1\n[suspicious_params]\nmean_hour = 23.5\n')
    cfg = load_config(path)
    assert cfg.model_kind is ModelKind.SIMPLE
    assert cfg.suspicious_params.mean_hour == 23.5
    assert cfg.suspicious_params.mean_num_txns == 10.0


def test_missing_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")


def test_resolved_seed_in_snapshot():
    r = run(ModelConfig(model_kind="simple", n_normal=3, n_suspicious=1))
    assert r.config.seed == 42


def test_routing_unbiased_across_seeds():
    same = total = 0
    for seed in range(20):
        r = run(paper_config("graph", seed=seed))
        sent = [e for e in r.events if e.sender_label is Label.SUSPICIOUS]
        same += sum(r.label_of(e.receiver_id) is Label.SUSPICIOUS for e in sent)
        total += len(sent)
    sd = math.sqrt(0.7 * 0.3 / total)
    assert abs(same / total - 0.7) <= 4 * sd
