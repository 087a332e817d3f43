/**
 * Thin HTTP client for the frame server. The viewer never computes
 * radiance: every displayed pixel comes back from POST /frame as PNG bytes.
 */

import type { FieldMetadata, PoseRequest } from './state';

export interface FrameResponse {
  png: Blob;
  latencyMicros: number;
  coveragePercent: number;
}

export class ServerError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = 'ServerError';
  }
}

export type FetchLike = typeof fetch;

export class FrameClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  async fetchMetadata(): Promise<FieldMetadata> {
    const res = await this.fetchImpl(new URL('/metadata', this.baseUrl).toString());
    if (!res.ok) {
      throw new ServerError(await describeFailure(res), res.status);
    }
    return (await res.json()) as FieldMetadata;
  }

  /**
   * Request one frame. The pose object is serialized with JSON.stringify
   * and nothing else, so saving the same object to disk and replaying it
   * with `fiblight render --pose-json` hits the identical code path.
   */
  async requestFrame(pose: PoseRequest, signal?: AbortSignal): Promise<FrameResponse> {
    const res = await this.fetchImpl(new URL('/frame', this.baseUrl).toString(), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(pose),
      signal,
    });
    if (!res.ok) {
      throw new ServerError(await describeFailure(res), res.status);
    }
    return {
      png: await res.blob(),
      latencyMicros: Number(res.headers.get('X-Render-Micros') ?? 'NaN'),
      coveragePercent: Number(res.headers.get('X-Coverage-Percent') ?? 'NaN'),
    };
  }
}

async function describeFailure(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { error?: string };
    if (body.error) {
      return body.error;
    }
  } catch {
    // non-JSON body; fall through to the status line
  }
  return `server returned ${res.status}`;
}
