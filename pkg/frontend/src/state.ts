/** Editor state: a server snapshot plus local pending edits.
 *
 * Every rendered datum traces back to a service payload kept verbatim in
 * `project`; pending edits overlay it until saved, and are cleared on a
 * successful save or an explicit cancel.
 */

import type { JobPayload, ProjectPayload } from "./api";

export interface EditorState {
  projectId: string | null;
  project: ProjectPayload | null;
  activeJob: JobPayload | null;
  pendingOrdering: number[] | null;
  pendingChoices: Map<number, string>;
  playbackPosition: number;
  error: string | null;
}

export function initialState(): EditorState {
  return {
    projectId: null,
    project: null,
    activeJob: null,
    pendingOrdering: null,
    pendingChoices: new Map(),
    playbackPosition: 0,
    error: null,
  };
}

export function withProject(state: EditorState, project: ProjectPayload): EditorState {
  return { ...state, projectId: project.id, project, error: null };
}

export function withJob(state: EditorState, job: JobPayload | null): EditorState {
  return { ...state, activeJob: job };
}

export function displayedOrdering(state: EditorState): number[] {
  if (state.pendingOrdering) return [...state.pendingOrdering];
  return state.project ? [...state.project.ordering] : [];
}

export function chosenCandidate(state: EditorState, segment: number): string | null {
  const pending = state.pendingChoices.get(segment);
  if (pending !== undefined) return pending;
  const slot = state.project?.illustrations.find((s) => s.index === segment);
  return slot ? slot.chosen_id : null;
}

export function hasPendingEdits(state: EditorState): boolean {
  return state.pendingOrdering !== null || state.pendingChoices.size > 0;
}

export function stageReorder(state: EditorState, ordering: number[]): EditorState {
  if (!state.project) return state;
  const current = state.project.ordering;
  const same = ordering.length === current.length && ordering.every((v, i) => v === current[i]);
  return { ...state, pendingOrdering: same ? null : [...ordering] };
}

export function stageChoice(state: EditorState, segment: number, candidateId: string): EditorState {
  const slot = state.project?.illustrations.find((s) => s.index === segment);
  if (!slot || !slot.candidate_ids.includes(candidateId)) {
    return { ...state, error: `candidate ${candidateId} is not valid for segment ${segment}` };
  }
  const pendingChoices = new Map(state.pendingChoices);
  if (slot.chosen_id === candidateId) {
    pendingChoices.delete(segment);
  } else {
    pendingChoices.set(segment, candidateId);
  }
  return { ...state, pendingChoices, error: null };
}

export function clearPending(state: EditorState): EditorState {
  return { ...state, pendingOrdering: null, pendingChoices: new Map() };
}

export function jobActive(state: EditorState): boolean {
  const job = state.activeJob;
  return job !== null && (job.state === "queued" || job.state === "running");
}
