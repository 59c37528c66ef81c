import { describe, expect, it } from 'vitest'

import { ApiClient, ApiRequestError } from '../src/api.js'

const jsonResponse = (status: number, body: unknown): Response =>
  new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  })

describe('ApiClient', () => {
  it('unwraps the query-types envelope', async () => {
    const client = new ApiClient('http://svc', async (url) => {
      expect(url).toBe('http://svc/query-types')
      return jsonResponse(200, {
        query_types: [{ name: 'a', kind: 'average', sensitivity: 1 }],
      })
    })
    expect(await client.getQueryTypes()).toEqual([
      { name: 'a', kind: 'average', sensitivity: 1 },
    ])
  })

  it('posts query submissions as JSON', async () => {
    const client = new ApiClient('http://svc', async (url, init) => {
      expect(url).toBe('http://svc/query')
      expect(init?.method).toBe('POST')
      expect(JSON.parse(String(init?.body))).toEqual({
        query_type: 'a',
        epsilon: 0.5,
        delta: 1e-4,
      })
      return jsonResponse(200, { noisy_value: 1 })
    })
    await client.submitQuery('a', 0.5, 1e-4)
  })

  it('surfaces error payloads as typed exceptions', async () => {
    const client = new ApiClient('http://svc', async () =>
      jsonResponse(409, {
        code: 'insufficient_budget',
        message: 'insufficient privacy budget',
        eps_squared_remaining: 0.25,
      }),
    )
    const err = await client.submitQuery('a', 9, 1e-4).catch((e) => e)
    expect(err).toBeInstanceOf(ApiRequestError)
    expect(err.status).toBe(409)
    expect(err.payload.code).toBe('insufficient_budget')
    expect(err.payload.eps_squared_remaining).toBe(0.25)
  })

  it('builds ledger paging query strings', async () => {
    const client = new ApiClient('http://svc', async (url) => {
      expect(url).toBe('http://svc/ledger?offset=10&limit=5')
      return jsonResponse(200, { total: 0, offset: 10, records: [] })
    })
    await client.getLedger(10, 5)
  })
})
