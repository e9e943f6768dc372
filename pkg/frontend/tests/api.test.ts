import { beforeEach, describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiRequestError } from '../src/api.js';

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

describe('ApiClient', () => {
  const fetchMock = vi.fn();
  const client = new ApiClient('http://api', fetchMock as typeof fetch);

  beforeEach(() => {
    fetchMock.mockReset();
  });

  it('issues exactly one request per action', async () => {
    fetchMock.mockResolvedValue(jsonResponse({ status: 'ok' }));
    await client.health();
    expect(fetchMock).toHaveBeenCalledTimes(1);
    expect(fetchMock).toHaveBeenCalledWith('http://api/health', undefined);
  });

  it('posts benchmark config as JSON', async () => {
    fetchMock.mockResolvedValue(
      jsonResponse({ benchmark_id: 'b1', n_records: 6, seed: 0, config_hash: 'h' }, 201),
    );
    const info = await client.createBenchmark(0, { pp: 1 });
    expect(info.benchmark_id).toBe('b1');
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe('http://api/benchmarks');
    expect(init.method).toBe('POST');
    expect(JSON.parse(init.body)).toEqual({ seed: 0, config: { pp: 1 } });
  });

  it('encodes record pagination in the query string', async () => {
    fetchMock.mockResolvedValue(jsonResponse({ total: 0, offset: 5, records: [] }));
    await client.listRecords('b1', 5, 10);
    expect(fetchMock.mock.calls[0][0]).toBe(
      'http://api/benchmarks/b1/records?offset=5&limit=10',
    );
  });

  it('sends resolve actions verbatim', async () => {
    fetchMock.mockResolvedValue(jsonResponse({ session_id: 's1' }));
    await client.resolve('s1', { action: 'select', index: 1 });
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe('http://api/sessions/s1/resolve');
    expect(JSON.parse(init.body)).toEqual({ action: 'select', index: 1 });
  });

  it('raises a typed error with the service error code', async () => {
    fetchMock.mockResolvedValue(
      jsonResponse({ detail: { code: 'already_resolved', message: 'nope' } }, 409),
    );
    const err = await client.resolve('s1', { action: 'skip' }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiRequestError);
    expect(err.status).toBe(409);
    expect(err.code).toBe('already_resolved');
  });

  it('polls the report route until it stops returning 409', async () => {
    fetchMock
      .mockResolvedValueOnce(
        jsonResponse({ detail: { code: 'experiment_running', message: '1/4' } }, 409),
      )
      .mockResolvedValueOnce(
        jsonResponse({ rows: [], config_hash: 'h', per_condition: {}, per_condition_type: {} }),
      );
    const report = await client.waitForReport('e1', 1);
    expect(report.config_hash).toBe('h');
    expect(fetchMock).toHaveBeenCalledTimes(2);
  });

  it('propagates non-409 polling failures', async () => {
    fetchMock.mockResolvedValue(
      jsonResponse({ detail: { code: 'experiment_failed', message: 'x' } }, 500),
    );
    await expect(client.waitForReport('e1', 1)).rejects.toMatchObject({ status: 500 });
  });

  it('builds image URLs without issuing a request', () => {
    expect(client.imageUrl('abc')).toBe('http://api/images/abc');
    expect(fetchMock).not.toHaveBeenCalled();
  });
});
