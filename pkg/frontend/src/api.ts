import type { InfoResponse, QueryResponse } from './types.js';

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

async function postJson<T>(url: string, body: unknown): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  } catch (err) {
    throw new ApiError(`service unreachable: ${String(err)}`);
  }
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const payload = await resp.json();
      if (payload && payload.error) detail = payload.error;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(`request failed: ${detail}`, resp.status);
  }
  return (await resp.json()) as T;
}

export function fetchQuery(
  baseUrl: string,
  phrase: string,
  cutoff: number,
): Promise<QueryResponse> {
  return postJson<QueryResponse>(`${baseUrl}/api/query`, { phrase, cutoff });
}

export async function fetchInfo(baseUrl: string): Promise<InfoResponse> {
  let resp: Response;
  try {
    resp = await fetch(`${baseUrl}/api/info`);
  } catch (err) {
    throw new ApiError(`service unreachable: ${String(err)}`);
  }
  if (!resp.ok) throw new ApiError(`info failed: ${resp.status}`, resp.status);
  return (await resp.json()) as InfoResponse;
}
