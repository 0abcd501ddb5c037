"""Built-in decoders and rules the manager ships with.

These cover the three event families the manager itself understands without
any plugin installed: SSH authentication failures from tailed auth logs,
file-integrity events from the agents' syscheck watcher, and derived
reputation-scan verdicts. Plugin fragments are appended after these.
"""

RULE_SSH_AUTH_FAILURE = 101
RULE_FIM_ADDED = 201
RULE_FIM_MODIFIED = 202
RULE_FIM_DELETED = 203
RULE_REPUTATION_HIT = 301

BUILTIN_DECODERS = """\
<decoder name="sshd-auth-failure">
<prematch>Failed password for (\\.+)</prematch>
</decoder>
<decoder name="sshd-auth-failure">
<parent>sshd-auth-failure</parent>
<regex>user (\\w+) from (\\.+) port (\\d+)</regex>
<order>srcuser, srcip, srcport</order>
</decoder>
<decoder name="sshd-auth-failure">
<parent>sshd-auth-failure</parent>
<regex>(\\w+) from (\\.+) port (\\d+)</regex>
<order>srcuser, srcip, srcport</order>
</decoder>
<decoder name="syscheck">
<prematch>\\.*SOC_NES: syscheck: (\\.+)</prematch>
</decoder>
<decoder name="syscheck">
<parent>syscheck</parent>
<regex>File '(\\.+)' (\\w+) sha256=(\\w+)</regex>
<order>filePath, action, sha256</order>
</decoder>
<decoder name="syscheck">
<parent>syscheck</parent>
<regex>File '(\\.+)' (\\w+)</regex>
<order>filePath, action</order>
</decoder>
<decoder name="reputation">
<prematch>\\.*SOC_NES: reputation: (\\.+)</prematch>
</decoder>
<decoder name="reputation">
<parent>reputation</parent>
<regex>(\\d+) (\\d+) (\\.+)</regex>
<order>positives, total, filePath</order>
</decoder>
"""

BUILTIN_RULES = f"""\
<rule id="{RULE_SSH_AUTH_FAILURE}" level="5">
<decoded_as>sshd-auth-failure</decoded_as>
<description>sshd: authentication failed.</description>
<group>authentication_failed,sshd</group>
</rule>
<rule id="{RULE_FIM_ADDED}" level="7">
<decoded_as>syscheck</decoded_as>
<field name="action">added</field>
<description>File added to the system.</description>
<group>syscheck,fim</group>
</rule>
<rule id="{RULE_FIM_MODIFIED}" level="7">
<decoded_as>syscheck</decoded_as>
<field name="action">modified</field>
<description>Integrity checksum changed.</description>
<group>syscheck,fim</group>
</rule>
<rule id="{RULE_FIM_DELETED}" level="7">
<decoded_as>syscheck</decoded_as>
<field name="action">deleted</field>
<description>File deleted from the system.</description>
<group>syscheck,fim</group>
</rule>
<rule id="{RULE_REPUTATION_HIT}" level="12">
<decoded_as>reputation</decoded_as>
<description>Malicious file detected by reputation scan.</description>
<group>reputation,virustotal</group>
</rule>
"""
