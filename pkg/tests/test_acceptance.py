"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines
live; they also land in the captured output of any failing test.
"""

import json
import random
import time
from pathlib import Path

import pytest

from soccore.clock import VirtualClock
from soccore.agent.client import LocalManagerClient
from soccore.agent.config import AgentConfig
from soccore.agent.daemon import AgentDaemon
from soccore.agent.runner import CompletedExecution
from soccore.agent.shipper import LocalShipTransport, LogShipper
from soccore.autoconfig.executor import execute_plan, teardown
from soccore.autoconfig.planner import plan_deployment
from soccore.autoconfig.topology import parse_topology
from soccore.autoconfig.vault import WrongPassphraseOrTampered, vault_decrypt, vault_encrypt
from soccore.manager.config import ManagerConfig
from soccore.manager.registry import FragmentParseError, diff_agents
from soccore.manager.service import ManagerService
from soccore.pluginpkg import PluginPackage, pack, parse_metadata
from soccore.sim.harness import simulate
from soccore.sim.scenario import load_scenario

from builders import build_archive, decoders_doc, make_service, metadata_text
from test_decoders_rules import _oracle_decode, _oracle_match, _random_instance

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
TEST_KDF = (2**8, 8, 1)


def _line(criterion: int, ok: bool, detail: str) -> None:
    print(f"[ACCEPTANCE {criterion:>2}] {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
    assert ok, f"criterion {criterion}: {detail}"


# -- 1: showcase end to end, deterministic, < 10 s ---------------------------


def test_criterion_1_showcase_deterministic():
    started = time.monotonic()
    scenario = load_scenario(SCENARIOS / "showcase.toml")
    transcripts = set()
    reports = []
    for _ in range(10):
        report = simulate(scenario)
        reports.append(report)
        transcripts.add(json.dumps(report.transcript, sort_keys=True))
    elapsed = time.monotonic() - started

    report = reports[-1]
    ok = all(r.passed for r in reports)
    kinds = [event["event"] for event in report.transcript]
    order = [
        kinds.index("plugin_imported"),
        kinds.index("plugin_enabled"),
        kinds.index("plugin_fetched"),
        kinds.index("plugin_run"),
        kinds.index("alert"),
        kinds.index("ar_executed"),
    ]
    ok = ok and order == sorted(order)
    fetched = next(e for e in report.transcript if e["event"] == "plugin_fetched")
    ok = ok and fetched["members"] == ["metadata.json", "script.py"]
    ok = ok and len(transcripts) == 1
    ok = ok and elapsed < 10.0
    _line(
        1,
        ok,
        f"showcase flow in order, minimal fetch of 2 members, "
        f"{len(transcripts)} distinct transcript over 10 runs, {elapsed:.2f}s",
    )


# -- 2: lifecycle invariants over randomized sequences, < 60 s ----------------


def _check_registry_invariants(service: ManagerService) -> None:
    registry = service.registry
    assert registry.composite_documents() == registry.rebuild_composites()
    enabled = {
        meta.norm_id: meta
        for meta in registry.list_metadata()
        if meta.enabled
    }
    for agent in registry.registered_agents():
        on_disk = json.loads(
            (registry.shared_dir / f"{agent}.json").read_text(encoding="utf-8")
        )
        derived = registry.flag_entries(agent)
        assert on_disk == derived
        expected = [
            {"id": pid, "version": enabled[pid].version}
            for pid in registry.enabled_order
            if agent in enabled[pid].agents
        ]
        assert derived == expected
        for entry in derived:
            assert entry["id"] in enabled
            assert agent in enabled[entry["id"]].agents


def test_criterion_2_lifecycle_invariants(tmp_path):
    started = time.monotonic()
    rng = random.Random(20240115)
    pool = [chr(ord("a") + index) * 32 for index in range(5)]
    agents = [f"{n:03d}" for n in range(1, 7)]
    sequences = 200

    for sequence in range(sequences):
        service = make_service(tmp_path / f"seq{sequence}", agents=agents)
        known: dict[str, int] = {}
        for op_index in range(8):
            operation = rng.choice(["import", "enable", "disable", "update", "delete"])
            pid = rng.choice(pool)
            try:
                if operation == "import":
                    service.api_import_plugin(
                        build_archive(
                            plugin_id=pid,
                            name=f"P{pool.index(pid)}",
                            rule_id=100001 + pool.index(pid),
                            agents=tuple(rng.sample(agents, rng.randint(0, 4))),
                            enabled=rng.random() < 0.3,
                        )
                    )
                elif operation == "enable":
                    service.enable_plugin(pid)
                elif operation == "disable":
                    service.disable_plugin(pid)
                elif operation == "update":
                    meta = service.api_get_metadata(pid)
                    service.api_update_metadata(
                        pid,
                        meta.replace(
                            version=f"0.{rng.randint(0, 3)}.{rng.randint(0, 9)}",
                            agents=rng.sample(agents, rng.randint(0, 4)),
                            enabled=rng.random() < 0.5,
                        ),
                    )
                else:
                    service.api_delete_plugin(pid)
            except Exception:
                pass  # rejected calls must leave a consistent state behind
            _check_registry_invariants(service)

        # enable∘disable restores byte-identical composites
        disabled = [m for m in service.registry.list_metadata() if not m.enabled]
        if disabled:
            target = disabled[0].norm_id
            before = service.registry.composite_documents()
            try:
                service.enable_plugin(target)
            except FragmentParseError:
                continue
            service.disable_plugin(target)
            assert service.registry.composite_documents() == before

    elapsed = time.monotonic() - started
    _line(2, elapsed < 60.0, f"{sequences} randomized lifecycle sequences, {elapsed:.1f}s")


# -- 3: diff_agents against the membership oracle ------------------------------


def test_criterion_3_diff_agents_properties():
    rng = random.Random(42)
    universe = [f"{n:03d}" for n in range(30)]
    for _ in range(1000):
        old = set(rng.sample(universe, rng.randint(0, 20)))
        new = set(rng.sample(universe, rng.randint(0, 20)))
        install, remove = diff_agents(old, new)
        for agent in universe:
            assert (agent in install) == (agent in new and agent not in old)
            assert (agent in remove) == (agent in old and agent not in new)
        assert install == new - old
        assert remove == old - new
        assert install & remove == set()
        assert install <= new and remove <= old
        assert (old - remove) | install == new
    _line(3, True, "1000 random (O, N) pairs match the membership oracle")


# -- 4: engine vs brute-force oracle on 500 random instances -------------------


def test_criterion_4_oracle_equivalence():
    from soccore.engine.decoders import decode_text, parse_decoders
    from soccore.engine.rules import match_rules, parse_rules

    rng = random.Random(777)
    lines_checked = 0
    for _ in range(500):
        decoder_doc, rule_doc, lines = _random_instance(rng)
        decoders = parse_decoders(decoder_doc)
        rules = parse_rules(rule_doc)
        for message in lines:
            lines_checked += 1
            engine_decoded = decode_text(message, decoders)
            oracle_decoded = _oracle_decode(message, decoders)
            if engine_decoded is None:
                assert oracle_decoded is None
                continue
            assert oracle_decoded == (engine_decoded.decoder_name, engine_decoded.fields)
            engine_rule = match_rules(engine_decoded, rules)
            oracle_rule = _oracle_match(
                engine_decoded.decoder_name, engine_decoded.fields, rules
            )
            assert engine_rule is oracle_rule
    _line(4, True, f"500 random instances, {lines_checked} lines, engine == oracle")


# -- 5: SSH failure scenario ----------------------------------------------------


def test_criterion_5_ssh_failure():
    report = simulate(load_scenario(SCENARIOS / "ssh_fail.toml"))
    ok = report.passed
    ok = ok and len(report.alerts) == 1
    ok = ok and report.alerts[0]["rule.level"] == 5
    ok = ok and report.alerts[0]["agent.id"] == "004"
    _line(5, ok, "one level-5 alert attributed to agent 004")


# -- 6: FIM + reputation scenario -------------------------------------------------


def test_criterion_6_fim_reputation():
    report = simulate(load_scenario(SCENARIOS / "fim_reputation.toml"))
    ok = report.passed
    ok = ok and report.alerts[0]["rule.description"] == "File added to the system."
    scans = report.observed["scans"]
    ok = ok and len(scans) == 1 and scans[0]["positives"] == 45
    derived = [a for a in report.alerts if a["rule.level"] == 12]
    ok = ok and len(derived) == 1
    _line(6, ok, "File-added alert, one reputation scan (45/70), one derived alert")


# -- 7: ticketing threshold over a 100-alert replay --------------------------------


def test_criterion_7_ticket_threshold(tmp_path):
    deliveries = []
    config = ManagerConfig(
        data_root=str(tmp_path / "m7"),
        agents=["001"],
        ticket_webhook_url="test://hook",
        ticket_threshold=5,
    )
    service = ManagerService(
        config,
        clock=VirtualClock(1705276800.0),
        notifier_synchronous=True,
        webhook_transport=lambda url, payload: deliveries.append(payload) or True,
    )

    leveled_rules = "".join(
        f'<rule id="{210000 + level}" level="{level}">'
        f"<decoded_as>dec_leveled</decoded_as>"
        f'<field name="val1">{level}</field>'
        f"<description>leveled {level}</description><group>replay</group></rule>\n"
        for level in range(16)
    )
    text = metadata_text("9" * 32, name="Leveled", enabled=True)
    package = PluginPackage(
        metadata=parse_metadata(text),
        metadata_text=text,
        script="pass\n",
        decoders_doc=decoders_doc("dec_leveled", "Leveled"),
        rules_doc=leveled_rules,
        active_response_script="pass\n",
    )
    service.api_import_plugin(pack(package, "full"))

    rng = random.Random(58)
    levels = [rng.randint(0, 15) for _ in range(100)]
    for level in levels:
        service.ingest_log(
            f"Feb 3 09:00:00 host soc: SOC_NES: Leveled: {level} x y", agent_id="001"
        )
    expected = sum(1 for level in levels if level >= 5)
    ok = len(deliveries) == expected
    ok = ok and all(d["rule.level"] >= 5 for d in deliveries)

    # a created ticket transitions open -> closed
    alert_id = service.api_list_alerts(min_level=1)["alerts"][0]["id"]
    ticket = service.api_create_ticket(alert_id, assignee="analyst")
    ok = ok and ticket.status == "open" and ticket.closed_at is None
    closed = service.api_close_ticket(ticket.id)
    ok = ok and closed.status == "closed" and closed.closed_at is not None
    _line(7, ok, f"{len(deliveries)} deliveries == {expected} alerts at level >= 5; ticket open->closed")


# -- 8: zero-day file watch scenario -------------------------------------------------


def test_criterion_8_zeroday_filewatch():
    report = simulate(load_scenario(SCENARIOS / "zeroday_filewatch.toml"))
    ok = report.passed
    levels = [a["rule.level"] for a in report.alerts]
    ok = ok and levels == [10, 15]
    ok = ok and report.observed["ar_invocations"] == [["notify", "/etc/shadow", "cat", "22276"]]
    ok = ok and len(report.observed["tickets"]) == 1
    _line(8, ok, "passwd read -> level 10, no AR; shadow read -> level 15 + 1 AR + 1 ticket")


# -- 9: agent convergence fuzz -----------------------------------------------------


class _CountingRunner:
    def __init__(self):
        self.active: dict[str, int] = {}
        self.violations = 0

    def run(self, script_path, workdir, timeout):
        key = str(workdir)
        self.active[key] = self.active.get(key, 0) + 1
        if self.active[key] > 1:
            self.violations += 1
        self.active[key] -= 1
        return CompletedExecution(exit_code=0, stdout="", stderr="")


def test_criterion_9_agent_convergence(tmp_path):
    started = time.monotonic()
    rng = random.Random(99)
    pool = ["2" * 32, "3" * 32, "4" * 32]
    sequences = 100
    for sequence in range(sequences):
        base = tmp_path / f"c9-{sequence}"
        clock = VirtualClock(1705276800.0)
        service = ManagerService(
            ManagerConfig(data_root=str(base / "m"), agents=["001"]),
            clock=clock,
            notifier_synchronous=True,
        )
        for index, pid in enumerate(pool):
            service.api_import_plugin(
                build_archive(
                    plugin_id=pid,
                    name=f"C{index}",
                    rule_id=100001 + index,
                    agents=("001",),
                    interval=3600,
                )
            )
        runner = _CountingRunner()
        config = AgentConfig(
            agent_id="001", ossec_dir=str(base / "a"), hostname="h", username="u"
        )
        daemon = AgentDaemon(
            config,
            LocalManagerClient(service),
            LogShipper(LocalShipTransport(service, "001")),
            clock=clock,
            runner=runner,
            synchronous_runs=True,
        )
        daemon.step()

        for _ in range(rng.randint(3, 6)):
            pid = rng.choice(pool)
            meta = service.api_get_metadata(pid)
            mutation = rng.choice(["enable", "disable", "bump_up", "bump_down", "retarget"])
            try:
                if mutation == "enable":
                    service.enable_plugin(pid)
                elif mutation == "disable":
                    service.disable_plugin(pid)
                elif mutation == "bump_up":
                    major = int(meta.version.split(".")[0]) + 1
                    service.api_update_metadata(pid, meta.replace(version=f"{major}.0.0"))
                elif mutation == "bump_down":
                    service.api_update_metadata(pid, meta.replace(version="0.0.0"))
                else:
                    new_agents = [] if "001" in meta.agents else ["001"]
                    service.api_update_metadata(pid, meta.replace(agents=new_agents))
            except Exception:
                pass
            # within 2 poll intervals the runtime set equals the flag file
            for _ in range(2):
                clock.advance(config.poll_interval)
                daemon.step()
            desired = {
                (entry["id"], entry["version"])
                for entry in service.api_get_flag_file("001")["entries"]
            }
            actual = {
                (runtime.plugin_id, runtime.version)
                for runtime in daemon.runtimes.values()
                if not runtime.quarantined
            }
            assert actual == desired, f"sequence {sequence}: {actual} != {desired}"
            assert runner.violations == 0
    elapsed = time.monotonic() - started
    _line(9, True, f"{sequences} mutation sequences converged within 2 polls, single-flight held ({elapsed:.1f}s)")


# -- 10: local deployment + vault properties ------------------------------------------


def test_criterion_10_local_deploy_and_vault(tmp_path):
    # vault: 1000 random payloads round-trip; tampering any byte is detected
    rng = random.Random(1010)
    for _ in range(1000):
        payload = rng.randbytes(rng.randint(0, 200))
        envelope = vault_encrypt(payload, "deploy-pp", TEST_KDF)
        assert vault_decrypt(envelope, "deploy-pp") == payload
        tampered = bytearray(envelope)
        index = rng.randrange(len(tampered))
        tampered[index] ^= 1 + rng.randrange(255)
        try:
            vault_decrypt(bytes(tampered), "deploy-pp")
            tamper_ok = False
        except WrongPassphraseOrTampered:
            tamper_ok = True
        assert tamper_ok

    # local deployment: 1 manager + 2 agents, both active, re-run idempotent
    topology = (
        "127.0.0.1: /keys/mgr: wazuh: admin\n"
        "127.0.0.2: /keys/a1: linux: root\n"
        "127.0.0.3: /keys/a2: linux: root\n"
    )
    plan = plan_deployment(parse_topology(topology))
    base = tmp_path / "deployment"
    started = time.monotonic()
    try:
        report = execute_plan(plan, transport="local", base_dir=base, wait_timeout=10)
        elapsed = time.monotonic() - started
        verify = [s for s in report.steps if s.action == "verify_agents"]
        deploy_ok = bool(verify) and verify[0].outcome == "done"
        ok = deploy_ok and elapsed < 10.0

        second = execute_plan(plan, transport="local", base_dir=base, wait_timeout=10)
        reused = [
            s.outcome
            for s in second.steps
            if s.action in ("install_manager", "install_agent")
        ]
        ok = ok and reused == ["already", "already", "already"]
    finally:
        teardown(base)
    _line(
        10,
        ok,
        f"manager + 2 agents active in {elapsed:.1f}s, re-run idempotent, "
        f"1000 vault payloads round-trip with tamper detection",
    )


# -- 11: volume shape -------------------------------------------------------------------


def test_criterion_11_volume():
    started = time.monotonic()
    report = simulate(load_scenario(SCENARIOS / "volume_auth.toml"))
    elapsed = time.monotonic() - started
    ok = report.passed
    ok = ok and len(report.alerts) == 10000
    ok = ok and all(a["rule.level"] == 5 for a in report.alerts)
    ok = ok and elapsed < 30.0
    _line(11, ok, f"10000 injected lines -> 10000 level-5 alerts, zero drops, {elapsed:.1f}s")
