import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiError, exportUrl, health, nextItem, submitLabel } from '../src/api.js';

function mockFetch(status: number, body: unknown) {
  const fn = vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    statusText: `status ${status}`,
    json: async () => body,
  }));
  vi.stubGlobal('fetch', fn);
  return fn;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('api client', () => {
  it('hits the health endpoint', async () => {
    const fetchMock = mockFetch(200, { status: 'ok' });
    const result = await health({ baseUrl: 'http://svc' });
    expect(result.status).toBe('ok');
    expect(fetchMock).toHaveBeenCalledWith('http://svc/api/health', expect.anything());
  });

  it('passes the reviewer as a query parameter without a token', async () => {
    const fetchMock = mockFetch(200, { item: null, progress: { labeled: 0, total: 0 } });
    await nextItem({ baseUrl: 'http://svc', reviewer: 'alice smith' }, 'proj-1');
    const url = fetchMock.mock.calls[0][0] as string;
    expect(url).toBe('http://svc/api/projects/proj-1/next?reviewer=alice%20smith');
  });

  it('sends the bearer token and omits the reviewer query with one', async () => {
    const fetchMock = mockFetch(200, { item: null, progress: { labeled: 0, total: 0 } });
    await nextItem({ baseUrl: 'http://svc', token: 's3cret' }, 'proj-1');
    const [url, init] = fetchMock.mock.calls[0] as [string, RequestInit];
    expect(url).toBe('http://svc/api/projects/proj-1/next');
    expect((init.headers as Record<string, string>).authorization).toBe('Bearer s3cret');
  });

  it('posts labels with note and reviewer', async () => {
    const fetchMock = mockFetch(200, { item: {}, progress: { labeled: 1, total: 5 } });
    await submitLabel({ baseUrl: 'http://svc', reviewer: 'bob' }, 'proj-1', 'ev9', 'LOOP', 'why');
    const [url, init] = fetchMock.mock.calls[0] as [string, RequestInit];
    expect(url).toBe('http://svc/api/projects/proj-1/events/ev9/label');
    expect(init.method).toBe('POST');
    expect(JSON.parse(init.body as string)).toEqual({
      label: 'LOOP',
      note: 'why',
      reviewer: 'bob',
    });
  });

  it('raises ApiError with the server detail on failure', async () => {
    mockFetch(400, { detail: 'label must be one of the raw types' });
    await expect(
      submitLabel({ baseUrl: 'http://svc' }, 'proj-1', 'ev9', 'LOOP', null),
    ).rejects.toThrowError(/label must be one of/);
    mockFetch(404, { detail: 'no such project' });
    const error = await health({ baseUrl: 'http://svc' }).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(404);
  });

  it('builds the export url', () => {
    expect(exportUrl({ baseUrl: 'http://svc' }, 'proj-2')).toBe(
      'http://svc/api/projects/proj-2/export?format=jsonl',
    );
  });
});
