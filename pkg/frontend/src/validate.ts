/**
 * Client-side metadata validation, mirroring the manager's invariants so the
 * edit form can refuse obviously-bad input before any request is sent. The
 * server stays the authority; this only filters what never could succeed.
 */

import type { PluginMetadataDoc } from "./api.js";

export interface FieldError {
  field: string;
  message: string;
}

const ID_PATTERN = /^[0-9a-f]{32}$/;
const VERSION_PATTERN = /^\d+(\.\d+)*$/;
const AGENT_PATTERN = /^\d{3}$/;

export function normalizePluginId(raw: string): string {
  return raw.replace(/-/g, "").toLowerCase();
}

export function validateMetadata(doc: PluginMetadataDoc): FieldError[] {
  const errors: FieldError[] = [];
  if (!ID_PATTERN.test(normalizePluginId(doc.id))) {
    errors.push({ field: "id", message: "id must normalize to 32 hex characters" });
  }
  if (typeof doc.name !== "string" || doc.name.length === 0) {
    errors.push({ field: "name", message: "name must not be empty" });
  }
  if (typeof doc.description !== "string") {
    errors.push({ field: "description", message: "description must be text" });
  }
  if (!VERSION_PATTERN.test(doc.version)) {
    errors.push({ field: "version", message: "version must be dotted integers, e.g. 0.0.1" });
  }
  const interval = doc.script?.interval;
  if (!Number.isInteger(interval) || (interval as number) < 1) {
    errors.push({ field: "script.interval", message: "interval must be an integer >= 1 second" });
  }
  if (!Array.isArray(doc.agents)) {
    errors.push({ field: "agents", message: "agents must be a list" });
  } else {
    for (const agent of doc.agents) {
      if (!AGENT_PATTERN.test(agent)) {
        errors.push({ field: "agents", message: `agent id ${JSON.stringify(agent)} must be 3 digits` });
      }
    }
  }
  return errors;
}
