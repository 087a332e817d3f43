import { describe, expect, it } from 'vitest';

import { FrameClient, ServerError } from '../src/client';
import type { PoseRequest } from '../src/state';

const metadataBody = {
  m: 64,
  n: 128,
  radius: 1,
  center: [0, 0, 0],
  hemisphere: false,
  texel_format: 'rgba8',
  suggested_orbit_radius: 2.5,
};

const pose: PoseRequest = {
  eye: [2.5, 0, 0.9],
  look_at: [0, 0, 0],
  up: [0, 0, 1],
  fov_deg: 45,
  width: 256,
  height: 256,
  mode: 'filtered',
};

function fakeFetch(handler: (url: string, init?: RequestInit) => Response) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const impl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    return handler(url, init);
  }) as typeof fetch;
  return { impl, calls };
}

describe('FrameClient.fetchMetadata', () => {
  it('returns the parsed metadata document', async () => {
    const { impl, calls } = fakeFetch(() => Response.json(metadataBody));
    const client = new FrameClient('http://localhost:8090', impl);
    expect(await client.fetchMetadata()).toEqual(metadataBody);
    expect(calls[0].url).toBe('http://localhost:8090/metadata');
  });

  it('surfaces a 503 while the field loads', async () => {
    const { impl } = fakeFetch(() =>
      Response.json({ error: 'field is still loading' }, { status: 503 }),
    );
    const client = new FrameClient('http://localhost:8090', impl);
    await expect(client.fetchMetadata()).rejects.toThrowError(
      expect.objectContaining({ name: 'ServerError', status: 503 }),
    );
  });
});

describe('FrameClient.requestFrame', () => {
  it('POSTs the pose verbatim and decodes the response headers', async () => {
    const png = new Uint8Array([0x89, 0x50, 0x4e, 0x47]);
    const { impl, calls } = fakeFetch(
      () =>
        new Response(png, {
          headers: {
            'content-type': 'image/png',
            'X-Render-Micros': '12345',
            'X-Coverage-Percent': '87.50',
          },
        }),
    );
    const client = new FrameClient('http://localhost:8090', impl);
    const frame = await client.requestFrame(pose);
    expect(calls[0].url).toBe('http://localhost:8090/frame');
    expect(calls[0].init?.method).toBe('POST');
    // Byte-exact serialization contract: the body is JSON.stringify(pose),
    // nothing reordered, nothing rounded.
    expect(calls[0].init?.body).toBe(JSON.stringify(pose));
    expect(JSON.parse(calls[0].init?.body as string)).toEqual(pose);
    expect(frame.latencyMicros).toBe(12345);
    expect(frame.coveragePercent).toBe(87.5);
    expect(new Uint8Array(await frame.png.arrayBuffer())).toEqual(png);
  });

  it('reports the named field from a 400 validation error', async () => {
    const { impl } = fakeFetch(() =>
      Response.json({ error: 'fov_deg: Input should be less than 180' }, { status: 400 }),
    );
    const client = new FrameClient('http://localhost:8090', impl);
    await expect(client.requestFrame({ ...pose, fov_deg: 270 })).rejects.toThrowError(
      /fov_deg/,
    );
  });

  it('falls back to the status code for non-JSON error bodies', async () => {
    const { impl } = fakeFetch(() => new Response('gateway timeout', { status: 504 }));
    const client = new FrameClient('http://localhost:8090', impl);
    const failure = client.requestFrame(pose);
    await expect(failure).rejects.toBeInstanceOf(ServerError);
    await expect(client.requestFrame(pose)).rejects.toThrowError(/504/);
  });
});
