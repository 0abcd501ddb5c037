/**
 * Plugin table state with optimistic mutations.
 *
 * Every row renders the last server-confirmed metadata; while a mutation is
 * in flight the row is marked optimistic (visually distinguished). The
 * mutation either gets confirmed by the server response or rolled back to
 * the prior confirmed state with the error recorded for the row banner -
 * there is no third state.
 */

import { ApiError, ManagerApi, PluginMetadataDoc } from "./api.js";

export interface PluginRow {
  doc: PluginMetadataDoc;
  optimistic: boolean;
  error: string | null;
}

export class PluginStore {
  private confirmed = new Map<string, PluginMetadataDoc>();
  private pending = new Map<string, PluginMetadataDoc>();
  private errors = new Map<string, string>();

  constructor(private readonly onChange: () => void = () => {}) {}

  applyServerList(docs: PluginMetadataDoc[]): void {
    this.confirmed = new Map(docs.map((doc) => [doc.id, doc]));
    for (const id of [...this.pending.keys()]) {
      if (!this.confirmed.has(id)) this.pending.delete(id);
    }
    this.onChange();
  }

  rows(): PluginRow[] {
    return [...this.confirmed.entries()].map(([id, doc]) => ({
      doc: this.pending.get(id) ?? doc,
      optimistic: this.pending.has(id),
      error: this.errors.get(id) ?? null,
    }));
  }

  row(id: string): PluginRow | undefined {
    return this.rows().find((row) => row.doc.id === id);
  }

  /** Optimistic enable/disable toggle; resolves when confirmed or rolled back. */
  async toggleEnabled(id: string, api: ManagerApi): Promise<boolean> {
    const current = this.confirmed.get(id);
    if (!current) return false;
    this.pending.set(id, { ...current, enabled: !current.enabled });
    this.errors.delete(id);
    this.onChange();
    try {
      const confirmed = await api.setEnabled(id, !current.enabled);
      this.confirmed.set(id, confirmed);
      this.pending.delete(id);
      this.onChange();
      return true;
    } catch (error) {
      this.pending.delete(id); // roll back to the prior confirmed state
      this.errors.set(id, error instanceof ApiError ? error.message : String(error));
      this.onChange();
      return false;
    }
  }

  /** Save an edited metadata document with the same confirm-or-rollback contract. */
  async saveEdit(id: string, edited: PluginMetadataDoc, api: ManagerApi): Promise<boolean> {
    const current = this.confirmed.get(id);
    if (!current) return false;
    this.pending.set(id, edited);
    this.errors.delete(id);
    this.onChange();
    try {
      const confirmed = await api.updateMetadata(id, edited);
      this.confirmed.set(id, confirmed);
      this.pending.delete(id);
      this.onChange();
      return true;
    } catch (error) {
      this.pending.delete(id);
      this.errors.set(id, error instanceof ApiError ? error.message : String(error));
      this.onChange();
      return false;
    }
  }

  confirmedDoc(id: string): PluginMetadataDoc | undefined {
    return this.confirmed.get(id);
  }

  dropRow(id: string): void {
    this.confirmed.delete(id);
    this.pending.delete(id);
    this.errors.delete(id);
    this.onChange();
  }
}
