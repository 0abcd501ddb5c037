"""soc: unified command line for the manager, agents, plugin tooling,
deployment, and the simulation harness.

Exit status: 0 success, 1 operational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import getpass
import json
import logging
import os
import sys
from pathlib import Path

from soccore.errors import SocError

log = logging.getLogger("soc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soc",
        description="Plug-and-play SOC core: manager, agent daemon, plugin "
        "tooling, automated deployment, and scenario simulation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_manager = sub.add_parser("manager", help="manager service")
    manager_sub = p_manager.add_subparsers(dest="manager_command", required=True)
    p_serve = manager_sub.add_parser("serve", help="run the manager (API + log ingest)")
    p_serve.add_argument("--config", help="manager YAML config file")

    p_agent = sub.add_parser("agent", help="agent daemon")
    agent_sub = p_agent.add_subparsers(dest="agent_command", required=True)
    for name, help_text in (
        ("run", "run the agent daemon"),
        ("startup", "install the daemon descriptor and state directories"),
        ("delstartup", "remove the daemon descriptor"),
    ):
        p = agent_sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="agent YAML config file")

    p_plugin = sub.add_parser("plugin", help="plugin packaging tools")
    plugin_sub = p_plugin.add_subparsers(dest="plugin_command", required=True)
    p_pack = plugin_sub.add_parser("pack", help="pack a plugin directory into a zip")
    p_pack.add_argument("directory")
    p_pack.add_argument("-o", "--output", help="output file (default <id>.zip)")
    p_pack.add_argument("--size", choices=("full", "minimal"), default="full")
    p_validate = plugin_sub.add_parser("validate", help="validate a plugin archive")
    p_validate.add_argument("archive")
    p_template = plugin_sub.add_parser("template", help="emit the plugin template zip")
    p_template.add_argument("-o", "--output", help="output file (default stdout)")

    p_topology = sub.add_parser("topology", help="deployment topology tools")
    topo_sub = p_topology.add_subparsers(dest="topology_command", required=True)
    p_format = topo_sub.add_parser("format", help="questionnaire -> encrypted topology file")
    p_format.add_argument("-a", "--agents", action="store_true", help="agents-only mode")
    p_format.add_argument("-o", "--output", default="topology.txt")
    p_format.add_argument("--answers", help="JSON answers file instead of prompts")
    _passphrase_options(p_format)
    p_parse = topo_sub.add_parser("parse", help="decrypt and list a topology file")
    p_parse.add_argument("file")
    _passphrase_options(p_parse)

    p_deploy = sub.add_parser("deploy", help="plan and execute a deployment")
    p_deploy.add_argument("--topology", help="topology file (required unless --teardown)")
    p_deploy.add_argument("--transport", choices=("local", "ssh-stub"), default="local")
    p_deploy.add_argument("--base-dir", default="deployment")
    p_deploy.add_argument("--teardown", action="store_true", help="stop a local deployment")
    _passphrase_options(p_deploy)

    p_sim = sub.add_parser("simulate", help="replay a scenario file")
    p_sim.add_argument("scenario")
    p_sim.add_argument("--report-dir", help="write report files (csv, figures) here")
    p_sim.add_argument("--repeat", type=int, default=1)
    p_sim.add_argument("--workspace", help="keep the simulation workspace here")

    return parser


def _passphrase_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--passphrase-env", help="environment variable holding the vault passphrase")
    parser.add_argument("--passphrase-file", help="file holding the vault passphrase")


def _read_passphrase(args, confirm: bool = False) -> str:
    if args.passphrase_env:
        value = os.environ.get(args.passphrase_env, "")
        if value:
            return value
        raise SocError(f"environment variable {args.passphrase_env} is empty")
    if args.passphrase_file:
        return Path(args.passphrase_file).read_text(encoding="utf-8").strip()
    phrase = getpass.getpass("New Vault password: " if confirm else "Vault password: ")
    if confirm:
        again = getpass.getpass("Confirm New Vault password: ")
        if phrase != again:
            raise SocError("passphrases do not match")
    return phrase


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return _dispatch(args)
    except SocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1


def _dispatch(args) -> int:
    if args.command == "manager":
        return _cmd_manager(args)
    if args.command == "agent":
        return _cmd_agent(args)
    if args.command == "plugin":
        return _cmd_plugin(args)
    if args.command == "topology":
        return _cmd_topology(args)
    if args.command == "deploy":
        return _cmd_deploy(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    raise AssertionError(f"unhandled command {args.command}")


def _cmd_manager(args) -> int:
    from soccore.manager.config import load_manager_config
    from soccore.manager.server import serve

    serve(load_manager_config(args.config))
    return 0


def _cmd_agent(args) -> int:
    from soccore.agent.config import load_agent_config
    from soccore.agent.install import install_daemon

    config = load_agent_config(args.config)
    if args.agent_command in ("startup", "delstartup"):
        path = install_daemon(config, args.agent_command, args.config)
        print(f"{args.agent_command}: descriptor {path}")
        return 0

    from soccore.agent.client import HttpManagerClient
    from soccore.agent.daemon import AgentDaemon
    from soccore.agent.shipper import LogShipper, TcpShipTransport

    host, port = config.ingest_endpoint()
    shipper = LogShipper(
        TcpShipTransport(host, port, config.agent_id),
        buffer_size=config.ship_buffer,
        mirror_path=config.ossec_path() / "plugin_syslog.log",
    )
    daemon = AgentDaemon(config, HttpManagerClient(config.manager_api), shipper)
    log.info("agent %s running against %s", config.agent_id, config.manager_api)
    daemon.run_forever()
    return 0


def _cmd_plugin(args) -> int:
    from soccore.pluginpkg import make_template, pack, package_from_dir, validate_package

    if args.plugin_command == "pack":
        package = package_from_dir(args.directory)
        data = pack(package, args.size)
        output = args.output or f"{package.metadata.norm_id}.zip"
        Path(output).write_bytes(data)
        print(f"packed {package.metadata.norm_id} ({args.size}) -> {output}")
        return 0
    if args.plugin_command == "validate":
        package = validate_package(Path(args.archive).read_bytes())
        print(
            f"valid {package.size_class.upper()} package: id={package.metadata.norm_id} "
            f"version={package.metadata.version} agents={','.join(package.metadata.agents) or '-'}"
        )
        return 0
    if args.plugin_command == "template":
        data = make_template()
        if args.output:
            Path(args.output).write_bytes(data)
            print(f"template written to {args.output}")
        else:
            sys.stdout.buffer.write(data)
        return 0
    raise AssertionError


def _collect_host(role: str):
    from soccore.autoconfig.formatter import HostAnswer

    ip = input(f"[+] {role} IP address: ").strip()
    key = input(f"[+] {role} SSH key path: ").strip()
    user = input(f"[+] {role} SSH user: ").strip()
    return HostAnswer(ip, key, user)


def _interactive_answers(agents_only: bool):
    from soccore.autoconfig.formatter import FormatterAnswers

    answers = FormatterAnswers(agents_only=agents_only)
    if not agents_only:
        for role in ("elastic", "kibana", "wazuh"):
            count = input(f"[*] How many {role} servers (0 or 1; clusters are out of scope): ").strip()
            if count and int(count) > 0:
                setattr(answers, role, _collect_host(role))
    for device in ("linux", "windows", "cisco", "juniper"):
        count = input(f"[?] How many {device} agents: ").strip()
        for index in range(int(count) if count else 0):
            answers.devices.append((device, _collect_host(f"{device} #{index + 1}")))
    if not agents_only:
        if input("[?] Integrate with a ticketing webhook? (y/n) ").strip().lower() == "y":
            answers.ticket_webhook = input("[#] webhook URL: ").strip()
        if input("[?] Integrate with a reputation scanner? (y/n) ").strip().lower() == "y":
            answers.reputation_key = input("[#] API key: ").strip()
    return answers


def _answers_from_file(path: str, agents_only: bool):
    from soccore.autoconfig.formatter import FormatterAnswers, HostAnswer

    raw = json.loads(Path(path).read_text(encoding="utf-8"))

    def host(entry):
        return HostAnswer(entry["ip"], entry["key_path"], entry["ssh_user"]) if entry else None

    return FormatterAnswers(
        elastic=host(raw.get("elastic")),
        kibana=host(raw.get("kibana")),
        wazuh=host(raw.get("wazuh")),
        devices=[(d["type"], host(d)) for d in raw.get("devices", [])],
        ticket_webhook=raw.get("ticket_webhook", ""),
        reputation_key=raw.get("reputation_key", ""),
        agents_only=agents_only or raw.get("agents_only", False),
    )


def _cmd_topology(args) -> int:
    from soccore.autoconfig.formatter import formatter, parse_directives
    from soccore.autoconfig.topology import parse_topology
    from soccore.autoconfig.vault import MAGIC, vault_decrypt, vault_encrypt

    if args.topology_command == "format":
        answers = (
            _answers_from_file(args.answers, args.agents)
            if args.answers
            else _interactive_answers(args.agents)
        )
        text = formatter(answers)
        passphrase = _read_passphrase(args, confirm=not args.answers)
        Path(args.output).write_bytes(vault_encrypt(text.encode("utf-8"), passphrase))
        print(f"Encryption successful: {args.output}")
        return 0

    data = Path(args.file).read_bytes()
    if data.startswith(MAGIC):
        passphrase = _read_passphrase(args)
        data = vault_decrypt(data, passphrase)
        print("Decryption successful")
    text = data.decode("utf-8")
    entries = parse_topology(text)
    integrations = parse_directives(text)
    for entry in entries:
        print(f"  {entry.ip:<18} {entry.device_type:<8} user={entry.ssh_user} key={entry.key_path}")
    if integrations:
        print(f"  integrations: {', '.join(sorted(integrations))}")
    print(f"{len(entries)} entries")
    return 0


def _cmd_deploy(args) -> int:
    from soccore.autoconfig.executor import StepFailure, execute_plan, teardown
    from soccore.autoconfig.formatter import parse_directives
    from soccore.autoconfig.planner import plan_deployment
    from soccore.autoconfig.topology import parse_topology
    from soccore.autoconfig.vault import MAGIC, vault_decrypt

    if args.teardown:
        pids = teardown(args.base_dir)
        print(f"teardown: signalled {len(pids)} processes")
        return 0
    if not args.topology:
        raise SocError("deploy needs --topology (or --teardown)")

    data = Path(args.topology).read_bytes()
    if data.startswith(MAGIC):
        passphrase = _read_passphrase(args)
        data = vault_decrypt(data, passphrase)
        print("Decryption successful")
    text = data.decode("utf-8")
    entries = parse_topology(text)
    integrations = parse_directives(text) or None
    plan = plan_deployment(entries, integrations)
    print(f"plan: {len(plan.steps)} steps over {len(entries)} hosts")
    try:
        report = execute_plan(plan, transport=args.transport, base_dir=args.base_dir)
    except StepFailure as exc:
        if exc.report is not None:
            _print_deploy_report(exc.report)
        print(f"deployment failed: {exc}", file=sys.stderr)
        return 1
    _print_deploy_report(report)
    return 0


def _print_deploy_report(report) -> None:
    for step in report.steps:
        print(f"  [{step.outcome:<7}] {step.action:<26} {step.target:<16} {step.detail}")
    for line in report.transcript:
        print(f"  $ {line}")
    if report.endpoints:
        print(f"endpoints: {report.endpoints}")
    print(f"total: {report.total_seconds:.2f}s")


def _cmd_simulate(args) -> int:
    from soccore.sim.harness import simulate
    from soccore.sim.report import write_report
    from soccore.sim.scenario import load_scenario

    scenario = load_scenario(args.scenario)
    reports = []
    for run_index in range(max(1, args.repeat)):
        workspace = args.workspace if args.repeat == 1 else None
        reports.append(simulate(scenario, workspace))
    report = reports[-1]
    for line in report.summary_lines():
        print(line)
    if len(reports) > 1:
        transcripts = {json.dumps(r.transcript, sort_keys=True) for r in reports}
        deterministic = len(transcripts) == 1 and all(r.passed for r in reports)
        print(
            f"determinism over {len(reports)} runs: "
            + ("identical transcripts" if len(transcripts) == 1 else "TRANSCRIPTS DIFFER")
        )
        if not deterministic:
            return 1
    if args.report_dir:
        written = write_report(report, args.report_dir)
        print(f"report files: {', '.join(str(p) for p in written)}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
