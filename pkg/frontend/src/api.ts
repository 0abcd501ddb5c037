/**
 * Typed client over the manager HTTP API. All console mutations go through
 * here; the fetch implementation is injectable so tests can fake transport.
 */

export interface PluginMetadataDoc {
  id: string;
  name: string;
  description: string;
  version: string;
  enabled: boolean;
  script: { interval: number; [key: string]: unknown };
  agents: string[];
  [key: string]: unknown;
}

export interface AlertRecord {
  id: number;
  timestamp: string;
  "agent.id": string;
  "rule.id": number;
  "rule.level": number;
  "rule.description": string;
  "rule.group": string;
  "decoder.name": string;
  full_log: string;
  [key: string]: unknown;
}

export interface AlertsPage {
  alerts: AlertRecord[];
  total: number;
  offset: number;
  limit: number;
}

export interface TicketRecord {
  id: number;
  alert_id: number;
  status: "open" | "closed";
  assignee: string;
  created_at: string;
  closed_at: string | null;
}

export interface HealthInfo {
  status: string;
  agents: { total: number; active: number; active_ids: string[]; registered: string[] };
  plugins: { total: number; enabled: number };
  counters: Record<string, number>;
  snapshot_version: number;
}

/** Server-side refusal; `detail` is rendered verbatim in the UI. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly error: string,
    public readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ManagerApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let error = `http ${response.status}`;
      let detail = "";
      try {
        const body = await response.json();
        error = body.error ?? error;
        detail = body.detail ?? "";
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, error, detail);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  listPlugins(): Promise<PluginMetadataDoc[]> {
    return this.json("/plugins/");
  }

  async importPlugin(archive: ArrayBuffer | Uint8Array): Promise<PluginMetadataDoc> {
    const body = archive instanceof Uint8Array ? archive : new Uint8Array(archive);
    return this.json("/plugins/", {
      method: "POST",
      headers: { "content-type": "application/zip" },
      body: body as unknown as BodyInit,
    });
  }

  deletePlugin(id: string): Promise<{ status: string }> {
    return this.json(`/plugins/${id}`, { method: "DELETE" });
  }

  getMetadata(id: string): Promise<PluginMetadataDoc> {
    return this.json(`/plugins/${id}.json`);
  }

  updateMetadata(id: string, doc: PluginMetadataDoc): Promise<PluginMetadataDoc> {
    return this.json(`/plugins/${id}.json`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
  }

  /** Enable/Disable button: read the confirmed doc, flip, write back. */
  async setEnabled(id: string, enabled: boolean): Promise<PluginMetadataDoc> {
    const doc = await this.getMetadata(id);
    return this.updateMetadata(id, { ...doc, enabled });
  }

  async downloadTemplate(): Promise<ArrayBuffer> {
    const response = await this.request("/plugins/template-plugin.zip");
    return response.arrayBuffer();
  }

  exportUrl(id: string, size: "full" | "minimal" = "full"): string {
    return `${this.baseUrl}/plugins/${id}.zip?size=${size}`;
  }

  listAlerts(params: {
    min_level?: number;
    agent?: string;
    limit?: number;
    offset?: number;
  } = {}): Promise<AlertsPage> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined) query.set(key, String(value));
    }
    const suffix = query.toString() ? `?${query}` : "";
    return this.json(`/alerts${suffix}`);
  }

  createTicket(alertId: number, assignee: string): Promise<TicketRecord> {
    return this.json("/tickets", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ alert_id: alertId, assignee }),
    });
  }

  listTickets(status?: "open" | "closed"): Promise<TicketRecord[]> {
    const suffix = status ? `?status=${status}` : "";
    return this.json(`/tickets${suffix}`);
  }

  closeTicket(id: number): Promise<TicketRecord> {
    return this.json(`/tickets/${id}/close`, { method: "POST" });
  }

  health(): Promise<HealthInfo> {
    return this.json("/health");
  }
}
