/** Typed fetch client for the review service HTTP API. */

import type { Progress, Project, RawLabel, ReviewItem } from './types.js';

export interface ApiConfig {
  baseUrl: string;
  /** bearer token; when set, the server derives the reviewer from it */
  token?: string;
  /** reviewer name used when the service runs without tokens */
  reviewer?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function request<T>(config: ApiConfig, path: string, init?: RequestInit): Promise<T> {
  const headers: Record<string, string> = { 'content-type': 'application/json' };
  if (config.token) {
    headers['authorization'] = `Bearer ${config.token}`;
  }
  const response = await fetch(config.baseUrl + path, { ...init, headers });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-json error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export async function health(config: ApiConfig): Promise<{ status: string }> {
  return request(config, '/api/health');
}

export async function listProjects(config: ApiConfig): Promise<Project[]> {
  return request(config, '/api/projects');
}

export async function nextItem(
  config: ApiConfig,
  projectId: string,
): Promise<{ item: ReviewItem | null; progress: Progress }> {
  const query = config.token ? '' : `?reviewer=${encodeURIComponent(config.reviewer ?? '')}`;
  return request(config, `/api/projects/${projectId}/next${query}`);
}

export async function submitLabel(
  config: ApiConfig,
  projectId: string,
  eventId: string,
  label: RawLabel,
  note: string | null,
): Promise<{ item: ReviewItem; progress: Progress }> {
  return request(config, `/api/projects/${projectId}/events/${encodeURIComponent(eventId)}/label`, {
    method: 'POST',
    body: JSON.stringify({ label, note, reviewer: config.token ? null : config.reviewer }),
  });
}

export function exportUrl(config: ApiConfig, projectId: string): string {
  return `${config.baseUrl}/api/projects/${projectId}/export?format=jsonl`;
}
