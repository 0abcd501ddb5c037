/**
 * Console entry point: wires the manager API, polling feeds, and the plugin
 * store to the DOM. Rendering only - all behavior lives in the logic modules.
 */

import { AlertRecord, AlertsPage, ApiError, ManagerApi, PluginMetadataDoc, TicketRecord } from "./api.js";
import { agentSetDiff } from "./diff.js";
import { PollingFeed } from "./polling.js";
import { PluginStore } from "./state.js";
import { validateMetadata } from "./validate.js";

interface ConsoleConfig {
  managerUrl: string;
  pollSeconds: number;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function levelClass(level: number): string {
  if (level >= 12) return "badge critical";
  if (level >= 7) return "badge high";
  if (level >= 5) return "badge medium";
  return "badge low";
}

async function loadConfig(): Promise<ConsoleConfig> {
  try {
    const response = await fetch("./config.json");
    const raw = await response.json();
    return { managerUrl: raw.managerUrl ?? "http://127.0.0.1:55002", pollSeconds: raw.pollSeconds ?? 3 };
  } catch {
    return { managerUrl: "http://127.0.0.1:55002", pollSeconds: 3 };
  }
}

class ConsoleApp {
  private store = new PluginStore(() => this.renderPlugins());
  private pluginsFeed: PollingFeed<PluginMetadataDoc[]>;
  private alertsFeed: PollingFeed<AlertsPage>;
  private ticketsFeed: PollingFeed<TicketRecord[]>;

  constructor(private api: ManagerApi, private root: HTMLElement) {
    this.pluginsFeed = new PollingFeed(
      () => this.api.listPlugins(),
      (state) => {
        if (state.data) this.store.applyServerList(state.data);
        this.renderBanner();
      },
    );
    this.alertsFeed = new PollingFeed(
      () => this.api.listAlerts({ limit: 50 }),
      () => {
        this.renderAlerts();
        this.renderBanner();
      },
    );
    this.ticketsFeed = new PollingFeed(
      () => this.api.listTickets(),
      () => this.renderTickets(),
    );
  }

  async pollAll(): Promise<void> {
    await Promise.all([
      this.pluginsFeed.pollOnce(),
      this.alertsFeed.pollOnce(),
      this.ticketsFeed.pollOnce(),
    ]);
  }

  start(pollSeconds: number): void {
    this.renderShell();
    void this.pollAll();
    setInterval(() => void this.pollAll(), pollSeconds * 1000);
  }

  // -- rendering ----------------------------------------------------------

  private renderShell(): void {
    this.root.replaceChildren(
      el("div", { id: "banner" }),
      el("h1", {}, "SOC console"),
      el(
        "section",
        { id: "plugins-section" },
        el("h2", {}, "Plugins"),
        el("div", { id: "plugin-actions" }),
        el("div", { id: "plugins" }),
      ),
      el("section", { id: "alerts-section" }, el("h2", {}, "Alerts"), el("div", { id: "alerts" })),
      el("section", { id: "tickets-section" }, el("h2", {}, "Tickets"), el("div", { id: "tickets" })),
    );
    this.renderPluginActions();
  }

  private renderBanner(): void {
    const banner = document.getElementById("banner");
    if (!banner) return;
    const stale = this.pluginsFeed.state.stale || this.alertsFeed.state.stale;
    if (!stale) {
      banner.replaceChildren();
      banner.className = "";
      return;
    }
    const updated = this.alertsFeed.state.lastUpdated ?? this.pluginsFeed.state.lastUpdated;
    const when = updated ? new Date(updated).toLocaleTimeString() : "never";
    banner.className = "stale-banner";
    banner.replaceChildren(`manager unreachable - showing data as of ${when}`);
  }

  private renderPluginActions(): void {
    const host = document.getElementById("plugin-actions");
    if (!host) return;
    const fileInput = el("input", { type: "file", accept: ".zip" }) as HTMLInputElement;
    const importButton = el("button", {}, "Import plugin");
    const importStatus = el("span", { class: "import-status" });
    importButton.addEventListener("click", () => {
      void (async () => {
        const file = fileInput.files?.[0];
        if (!file) {
          importStatus.replaceChildren("choose a .zip first");
          return;
        }
        importStatus.replaceChildren(`uploading ${file.name}...`);
        try {
          const meta = await this.api.importPlugin(await file.arrayBuffer());
          importStatus.replaceChildren(`imported ${meta.name} (${meta.id})`);
          await this.pluginsFeed.pollOnce();
        } catch (error) {
          importStatus.replaceChildren(
            error instanceof ApiError ? `${error.error}: ${error.detail}` : String(error),
          );
        }
      })();
    });
    const templateButton = el("button", {}, "Download template");
    templateButton.addEventListener("click", () => {
      void (async () => {
        const buffer = await this.api.downloadTemplate();
        const blob = new Blob([buffer], { type: "application/zip" });
        const link = el("a", { href: URL.createObjectURL(blob), download: "template-plugin.zip" });
        link.click();
      })();
    });
    host.replaceChildren(fileInput, importButton, importStatus, templateButton);
  }

  private renderPlugins(): void {
    const host = document.getElementById("plugins");
    if (!host) return;
    const table = el("table", { class: "plugins" });
    table.append(
      el(
        "tr",
        {},
        ...["name", "version", "interval", "agents", "state", "actions"].map((h) => el("th", {}, h)),
      ),
    );
    for (const row of this.store.rows()) {
      const doc = row.doc;
      const toggle = el("button", {}, doc.enabled ? "Disable" : "Enable");
      toggle.addEventListener("click", () => void this.store.toggleEnabled(doc.id, this.api));
      const download = el("a", { href: this.api.exportUrl(doc.id), download: `${doc.id}.zip` }, "Download");
      const remove = el("button", {}, "Remove");
      remove.addEventListener("click", () => {
        if (window.confirm(`Remove plugin ${doc.name}? This disables it and deletes its files.`)) {
          void this.api
            .deletePlugin(doc.id)
            .then(() => this.store.dropRow(doc.id))
            .catch((error) => window.alert(String(error)));
        }
      });
      const edit = el("button", {}, "Edit");
      edit.addEventListener("click", () => this.openEditor(doc.id));
      const tr = el(
        "tr",
        { class: row.optimistic ? "optimistic" : "" },
        el("td", {}, doc.name),
        el("td", {}, doc.version),
        el("td", {}, String(doc.script.interval)),
        el("td", {}, doc.agents.join(", ")),
        el("td", {}, doc.enabled ? "enabled" : "disabled"),
        el("td", {}, toggle, " ", download, " ", remove, " ", edit),
      );
      if (row.error) {
        tr.append(el("td", { class: "row-error" }, row.error));
      }
      table.append(tr);
    }
    host.replaceChildren(table);
  }

  private openEditor(id: string): void {
    const confirmed = this.store.confirmedDoc(id);
    if (!confirmed) return;
    const host = document.getElementById("plugins");
    if (!host) return;
    const name = el("input", { value: confirmed.name }) as HTMLInputElement;
    const description = el("input", { value: confirmed.description }) as HTMLInputElement;
    const version = el("input", { value: confirmed.version }) as HTMLInputElement;
    const interval = el("input", { value: String(confirmed.script.interval) }) as HTMLInputElement;
    const agents = el("input", { value: confirmed.agents.join(",") }) as HTMLInputElement;
    const preview = el("div", { class: "diff-preview" });
    const problems = el("div", { class: "field-errors" });

    const collect = (): PluginMetadataDoc => ({
      ...confirmed,
      name: name.value,
      description: description.value,
      version: version.value,
      script: { ...confirmed.script, interval: Number(interval.value) },
      agents: agents.value.split(",").map((t) => t.trim()).filter(Boolean),
    });
    const refresh = () => {
      const edited = collect();
      const diff = agentSetDiff(confirmed.agents, edited.agents);
      preview.replaceChildren(
        `install on: {${diff.install.join(", ")}}  remove from: {${diff.remove.join(", ")}}`,
      );
      problems.replaceChildren(
        ...validateMetadata(edited).map((e) => el("div", {}, `${e.field}: ${e.message}`)),
      );
    };
    for (const input of [name, description, version, interval, agents]) {
      input.addEventListener("input", refresh);
    }
    refresh();

    const save = el("button", {}, "Save");
    save.addEventListener("click", () => {
      const edited = collect();
      if (validateMetadata(edited).length > 0) return; // inline errors shown, no request
      void this.store.saveEdit(id, edited, this.api).then(() => dialog.remove());
    });
    const cancel = el("button", {}, "Cancel");
    const dialog = el(
      "div",
      { class: "editor" },
      el("h3", {}, `Edit ${confirmed.name}`),
      el("label", {}, "name ", name),
      el("label", {}, "description ", description),
      el("label", {}, "version ", version),
      el("label", {}, "interval ", interval),
      el("label", {}, "agents ", agents),
      preview,
      problems,
      save,
      cancel,
    );
    cancel.addEventListener("click", () => dialog.remove());
    host.prepend(dialog);
  }

  private renderAlerts(): void {
    const host = document.getElementById("alerts");
    if (!host) return;
    const page = this.alertsFeed.state.data;
    if (!page) return;
    const list = el("div", { class: "alert-feed" });
    for (const alert of page.alerts) {
      list.append(this.alertCard(alert));
    }
    host.replaceChildren(list);
  }

  private alertCard(alert: AlertRecord): HTMLElement {
    const open = el("button", {}, "Open ticket");
    open.addEventListener("click", () => {
      void this.api
        .createTicket(alert.id, "console")
        .then(() => this.ticketsFeed.pollOnce())
        .catch((error) => window.alert(String(error)));
    });
    const fields = Object.entries(alert)
      .filter(([key]) => key.startsWith("data."))
      .map(([key, value]) => el("div", { class: "alert-field" }, `${key} = ${String(value)}`));
    const details = el("details", {}, el("summary", {}, alert.full_log), ...fields);
    return el(
      "div",
      { class: "alert-card" },
      el("span", { class: levelClass(alert["rule.level"]) }, String(alert["rule.level"])),
      el("span", { class: "alert-desc" }, ` ${alert["rule.description"]} `),
      el("span", { class: "alert-meta" }, `agent ${alert["agent.id"]} at ${alert.timestamp} `),
      open,
      details,
    );
  }

  private renderTickets(): void {
    const host = document.getElementById("tickets");
    if (!host) return;
    const tickets = this.ticketsFeed.state.data ?? [];
    const table = el("table", { class: "tickets" });
    table.append(el("tr", {}, ...["id", "alert", "status", "assignee", "actions"].map((h) => el("th", {}, h))));
    for (const ticket of tickets) {
      const close = el("button", {}, "Close");
      close.addEventListener("click", () => {
        void this.api.closeTicket(ticket.id).then(() => this.ticketsFeed.pollOnce());
      });
      table.append(
        el(
          "tr",
          {},
          el("td", {}, String(ticket.id)),
          el("td", {}, String(ticket.alert_id)),
          el("td", {}, ticket.status),
          el("td", {}, ticket.assignee),
          el("td", {}, ticket.status === "open" ? close : "-"),
        ),
      );
    }
    host.replaceChildren(table);
  }
}

export async function boot(): Promise<void> {
  const config = await loadConfig();
  const api = new ManagerApi(config.managerUrl);
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  new ConsoleApp(api, root).start(config.pollSeconds);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot();
}
