/**
 * Agent-set edit preview: which agents will have the plugin installed and
 * which will have it removed when the agents list changes. Shown before
 * saving so the operator confirms the effect; must mirror the manager's own
 * computation exactly.
 */

export interface AgentSetDiff {
  install: string[];
  remove: string[];
}

export function agentSetDiff(oldAgents: string[], newAgents: string[]): AgentSetDiff {
  const oldSet = new Set(oldAgents);
  const newSet = new Set(newAgents);
  const install = [...newSet].filter((agent) => !oldSet.has(agent)).sort();
  const remove = [...oldSet].filter((agent) => !newSet.has(agent)).sort();
  return { install, remove };
}
