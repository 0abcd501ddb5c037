/**
 * Console against a live desk-scale manager (spawned as a child process):
 * template import, enable toggle, agent-list edit preview vs the manager's
 * actual install/remove behavior, ticket open/close, and graceful offline
 * degradation to the stale-banner state.
 */

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import net from "node:net";
import os from "node:os";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ManagerApi } from "../src/api.js";
import { agentSetDiff } from "../src/diff.js";
import { PollingFeed } from "../src/polling.js";
import { PluginStore } from "../src/state.js";

const LIVE_TIMEOUT = 60_000;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitForHealth(api: ManagerApi, deadlineMs: number): Promise<void> {
  const deadline = Date.now() + deadlineMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const health = await api.health();
      if (health.status === "ok") return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error(`manager never became healthy: ${String(lastError)}`);
}

function sendIngestLines(port: number, lines: string[]): Promise<void> {
  return new Promise((resolve, reject) => {
    const socket = net.createConnection({ host: "127.0.0.1", port }, () => {
      socket.write(lines.map((line) => line + "\n").join(""), () => {
        socket.end();
        resolve();
      });
    });
    socket.on("error", reject);
  });
}

describe("console against a live manager", () => {
  let manager: ChildProcess;
  let api: ManagerApi;
  let apiPort: number;
  let ingestPort: number;

  beforeAll(async () => {
    apiPort = await freePort();
    ingestPort = await freePort();
    const workdir = mkdtempSync(path.join(os.tmpdir(), "soc-console-"));
    const configPath = path.join(workdir, "manager.yml");
    writeFileSync(
      configPath,
      [
        "api_host: 127.0.0.1",
        `api_port: ${apiPort}`,
        "ingest_host: 127.0.0.1",
        `ingest_port: ${ingestPort}`,
        `data_root: ${path.join(workdir, "data")}`,
        'agents: ["001", "002", "003"]',
        "",
      ].join("\n"),
    );
    manager = spawn("python3", ["-m", "soccore.cli", "manager", "serve", "--config", configPath], {
      stdio: "ignore",
    });
    api = new ManagerApi(`http://127.0.0.1:${apiPort}`);
    await waitForHealth(api, 20_000);
  }, LIVE_TIMEOUT);

  afterAll(() => {
    manager?.kill("SIGTERM");
  });

  it(
    "imports the template, toggles it, previews agent edits, and works tickets",
    async () => {
      // template download + import: a new disabled row appears
      const template = await api.downloadTemplate();
      expect(template.byteLength).toBeGreaterThan(0);
      const imported = await api.importPlugin(template);
      expect(imported.enabled).toBe(false);

      const store = new PluginStore();
      store.applyServerList(await api.listPlugins());
      expect(store.rows()).toHaveLength(1);
      const pluginId = store.rows()[0].doc.id;

      // enable toggle round: server confirms, row shows enabled
      expect(await store.toggleEnabled(pluginId, api)).toBe(true);
      expect(store.row(pluginId)!.doc.enabled).toBe(true);
      const flags001 = await (await fetch(`http://127.0.0.1:${apiPort}/shared/001.json`)).json();
      expect(flags001).toHaveLength(1);

      // agent-list edit: the preview must equal what the manager then does
      const confirmed = store.confirmedDoc(pluginId)!;
      const edited = { ...confirmed, agents: ["002", "003"] };
      const preview = agentSetDiff(confirmed.agents, edited.agents);
      expect(preview).toEqual({ install: ["003"], remove: ["001"] });
      expect(await store.saveEdit(pluginId, edited, api)).toBe(true);
      for (const [agent, count] of [["001", 0], ["002", 1], ["003", 1]] as const) {
        const flags = await (await fetch(`http://127.0.0.1:${apiPort}/shared/${agent}.json`)).json();
        expect(flags).toHaveLength(count);
      }

      // raise an alert over the ingest channel, then open and close a ticket
      await sendIngestLines(ingestPort, [
        "AGENT 002",
        "Jan 26 13:04:09 web01 sshd[4411]: Failed password for invalid user test from 1.2.3.4 port 42044 ssh2",
      ]);
      const alertsDeadline = Date.now() + 5000;
      let page = await api.listAlerts();
      while (page.total === 0 && Date.now() < alertsDeadline) {
        await new Promise((resolve) => setTimeout(resolve, 100));
        page = await api.listAlerts();
      }
      expect(page.total).toBeGreaterThan(0);
      const ticket = await api.createTicket(page.alerts[0].id, "console");
      expect(ticket.status).toBe("open");
      const closed = await api.closeTicket(ticket.id);
      expect(closed.status).toBe("closed");
      expect(closed.closed_at).not.toBeNull();
    },
    LIVE_TIMEOUT,
  );

  it(
    "degrades to the stale banner when the manager goes away",
    async () => {
      const feed = new PollingFeed(() => api.listAlerts({ limit: 10 }));
      expect(await feed.pollOnce()).toBe(true);
      expect(feed.state.stale).toBe(false);

      manager.kill("SIGTERM");
      await new Promise((resolve) => setTimeout(resolve, 600));

      // never a throw: the feed flags staleness and keeps the old data
      expect(await feed.pollOnce()).toBe(false);
      expect(feed.state.stale).toBe(true);
      expect(feed.state.data).not.toBeNull();
      expect(feed.state.lastUpdated).not.toBeNull();
    },
    LIVE_TIMEOUT,
  );
});
