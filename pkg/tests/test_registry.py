"""Plugin registry: lifecycle state machine, composites, flag files."""

import json

import pytest
from hypothesis import given, strategies as st

from soccore.manager.registry import (
    AlreadyEnabled,
    DuplicatePlugin,
    FragmentParseError,
    IdMismatch,
    NotEnabled,
    PluginRegistry,
    UnknownAgent,
    UnknownPlugin,
    diff_agents,
)
from soccore.manager.builtin import BUILTIN_DECODERS, BUILTIN_RULES
from soccore.pluginpkg import validate_package

from builders import build_archive, build_package, make_service

PID_A = "a" * 32
PID_B = "b" * 32


@pytest.fixture
def service(tmp_path):
    return make_service(tmp_path)


class TestImportDelete:
    def test_import_disabled_installs_nothing(self, service):
        meta = service.api_import_plugin(build_archive(plugin_id=PID_A))
        assert meta.enabled is False
        assert (service.registry.plugins_dir / PID_A / "script.py").exists()
        decoders, rules = service.registry.composite_documents()
        assert decoders == "" and rules == ""

    def test_duplicate_import(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A))
        with pytest.raises(DuplicatePlugin):
            service.api_import_plugin(build_archive(plugin_id=PID_A))

    def test_import_enabled_installs_in_one_call(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A, enabled=True))
        decoders, _ = service.registry.composite_documents()
        assert PID_A in decoders
        assert service.api_get_flag_file("001")["entries"] == [
            {"id": PID_A, "version": "0.0.1"}
        ]

    def test_delete_enabled_cleans_up(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A, enabled=True))
        service.api_delete_plugin(PID_A)
        decoders, rules = service.registry.composite_documents()
        assert decoders == "" and rules == ""
        assert service.api_get_flag_file("001")["entries"] == []
        assert not (service.registry.plugins_dir / PID_A).exists()
        with pytest.raises(UnknownPlugin):
            service.api_get_metadata(PID_A)

    def test_delete_unknown(self, service):
        with pytest.raises(UnknownPlugin):
            service.api_delete_plugin("f" * 32)


class TestEnableDisable:
    def test_enable_disable_restores_composites_byte_identical(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A))
        before = service.registry.composite_documents()
        service.enable_plugin(PID_A)
        mid = service.registry.composite_documents()
        assert mid != before
        assert service.registry.ar_script_path(PID_A).exists()
        service.disable_plugin(PID_A)
        assert service.registry.composite_documents() == before
        assert not service.registry.ar_script_path(PID_A).exists()

    def test_double_enable(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A, enabled=True))
        with pytest.raises(AlreadyEnabled):
            service.enable_plugin(PID_A)

    def test_disable_never_enabled(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A))
        with pytest.raises(NotEnabled):
            service.disable_plugin(PID_A)

    def test_disable_touches_only_its_fragments(self, service):
        service.api_import_plugin(
            build_archive(plugin_id=PID_A, name="Alpha", rule_id=100001, enabled=True)
        )
        service.api_import_plugin(
            build_archive(plugin_id=PID_B, name="Beta", rule_id=100002, enabled=True)
        )
        service.disable_plugin(PID_A)
        decoders, rules = service.registry.composite_documents()
        rebuilt = service.registry.rebuild_composites()
        assert (decoders, rules) == rebuilt
        assert PID_A not in decoders and PID_B in decoders

    def test_bad_fragment_rejected_whole(self, service):
        from soccore.pluginpkg.archive import PluginPackage

        package = build_package(plugin_id=PID_A)
        bad = PluginPackage(
            metadata=package.metadata.replace(enabled=True),
            metadata_text=package.metadata_text,
            script=package.script,
            decoders_doc=package.decoders_doc,
            rules_doc='<rule id="x" level="3"><decoded_as>d</decoded_as></rule>',
            active_response_script=package.active_response_script,
        )
        registry = service.registry
        with pytest.raises(FragmentParseError):
            registry.import_package(bad)
        assert registry.composite_documents() == ("", "")
        assert not (registry.plugins_dir / PID_A).exists()

    def test_snapshot_includes_builtins_and_fragments(self, service):
        base_version = service.registry.snapshot.version
        service.api_import_plugin(build_archive(plugin_id=PID_A, enabled=True))
        snapshot = service.registry.snapshot
        assert snapshot.version > base_version
        names = {d.name for d in snapshot.decoders}
        assert "sshd-auth-failure" in names  # builtin
        assert "dec_testplugin" in names  # plugin fragment


class TestMetadataUpdate:
    def test_id_mismatch(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A))
        meta = service.api_get_metadata(PID_A)
        with pytest.raises(IdMismatch):
            service.api_update_metadata(PID_A, meta.replace(id=PID_B))

    def test_version_bump_while_enabled_republishes(self, service):
        service.api_import_plugin(
            build_archive(plugin_id=PID_A, agents=("001", "002"), enabled=True)
        )
        meta = service.api_get_metadata(PID_A)
        service.api_update_metadata(PID_A, meta.replace(version="0.0.2"))
        for agent in ("001", "002"):
            assert service.api_get_flag_file(agent)["entries"] == [
                {"id": PID_A, "version": "0.0.2"}
            ]

    def test_agent_set_change_moves_entries(self, service):
        service.register_agent("003")
        service.api_import_plugin(
            build_archive(plugin_id=PID_A, agents=("001", "002"), enabled=True)
        )
        meta = service.api_get_metadata(PID_A)
        service.api_update_metadata(PID_A, meta.replace(agents=["002", "003"]))
        assert service.api_get_flag_file("001")["entries"] == []
        assert service.api_get_flag_file("002")["entries"] == [
            {"id": PID_A, "version": "0.0.1"}
        ]
        assert service.api_get_flag_file("003")["entries"] == [
            {"id": PID_A, "version": "0.0.1"}
        ]

    def test_enable_through_update(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A))
        meta = service.api_get_metadata(PID_A)
        updated = service.api_update_metadata(PID_A, meta.replace(enabled=True))
        assert updated.enabled is True
        decoders, _ = service.registry.composite_documents()
        assert PID_A in decoders
        # and back off again
        service.api_update_metadata(PID_A, updated.replace(enabled=False))
        assert service.registry.composite_documents() == ("", "")


class TestFlagFiles:
    def test_unknown_agent(self, service):
        with pytest.raises(UnknownAgent):
            service.api_get_flag_file("099")

    def test_two_plugins_in_enable_order(self, service):
        service.api_import_plugin(
            build_archive(plugin_id=PID_B, name="Beta", rule_id=100002, agents=("002",))
        )
        service.api_import_plugin(
            build_archive(
                plugin_id=PID_A, name="Alpha", rule_id=100001, agents=("002",), version="0.1.0"
            )
        )
        service.enable_plugin(PID_A)
        service.enable_plugin(PID_B)
        assert service.api_get_flag_file("002")["entries"] == [
            {"id": PID_A, "version": "0.1.0"},
            {"id": PID_B, "version": "0.0.1"},
        ]

    def test_flag_file_on_disk_matches_api(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A, enabled=True))
        path = service.registry.shared_dir / "001.json"
        assert json.loads(path.read_text()) == service.api_get_flag_file("001")["entries"]


class TestRestart:
    def test_state_survives_reload(self, service, tmp_path):
        service.api_import_plugin(
            build_archive(plugin_id=PID_A, name="Alpha", rule_id=100001, enabled=True)
        )
        service.api_import_plugin(build_archive(plugin_id=PID_B, name="Beta", rule_id=100002))
        before = service.registry.composite_documents()

        reloaded = PluginRegistry(
            tmp_path / "manager-data", BUILTIN_DECODERS, BUILTIN_RULES
        )
        assert reloaded.composite_documents() == before
        assert reloaded.enabled_order == [PID_A]
        assert reloaded.get(PID_A).metadata.enabled is True
        assert reloaded.get(PID_B).metadata.enabled is False
        assert reloaded.flag_entries("001") == [{"id": PID_A, "version": "0.0.1"}]


class TestExport:
    def test_export_round_trip(self, service):
        service.api_import_plugin(build_archive(plugin_id=PID_A))
        full = validate_package(service.api_export_plugin(PID_A, "full"))
        assert full.size_class == "full"
        minimal = validate_package(service.api_export_plugin(PID_A, "minimal"))
        assert minimal.size_class == "minimal"
        assert minimal.script == full.script


class TestDiffAgents:
    def test_spec_example(self):
        install, remove = diff_agents({"001", "002", "003"}, {"002", "004"})
        assert remove == {"001", "003"}
        assert install == {"004"}

    def test_fixed_point(self):
        install, remove = diff_agents({"001"}, {"001"})
        assert install == set() and remove == set()

    def test_fresh_enable(self):
        install, remove = diff_agents(set(), {"001", "002"})
        assert install == {"001", "002"} and remove == set()

    @given(
        st.sets(st.integers(0, 20), max_size=12),
        st.sets(st.integers(0, 20), max_size=12),
    )
    def test_partition_laws(self, old, new):
        old = {f"{n:03d}" for n in old}
        new = {f"{n:03d}" for n in new}
        install, remove = diff_agents(old, new)
        # membership-enumeration oracle
        for agent in old | new:
            assert (agent in install) == (agent in new and agent not in old)
            assert (agent in remove) == (agent in old and agent not in new)
        assert install & remove == set()
        assert install <= new
        assert remove <= old
        assert (old - remove) | install == new
