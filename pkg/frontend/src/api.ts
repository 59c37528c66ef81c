import type {
  ApiError,
  BudgetInfo,
  LedgerPage,
  QueryResult,
  QueryTypeInfo,
  SpendReportInfo,
  VerifyResult,
} from './types.js'

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly payload: ApiError,
  ) {
    super(payload.message)
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ApiClient {
  private readonly fetchFn: FetchLike

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init))
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init)
    const body = await response.json()
    if (!response.ok) {
      const payload: ApiError =
        body && typeof body.code === 'string'
          ? body
          : { code: 'unexpected', message: JSON.stringify(body) }
      throw new ApiRequestError(response.status, payload)
    }
    return body as T
  }

  async getQueryTypes(): Promise<QueryTypeInfo[]> {
    const body = await this.request<{ query_types: QueryTypeInfo[] }>('/query-types')
    return body.query_types
  }

  getBudget(): Promise<BudgetInfo> {
    return this.request<BudgetInfo>('/budget')
  }

  getLedger(offset: number, limit: number): Promise<LedgerPage> {
    return this.request<LedgerPage>(`/ledger?offset=${offset}&limit=${limit}`)
  }

  verifyChain(): Promise<VerifyResult> {
    return this.request<VerifyResult>('/ledger/verify')
  }

  getReport(): Promise<SpendReportInfo> {
    return this.request<SpendReportInfo>('/report')
  }

  submitQuery(queryType: string, epsilon: number, delta: number): Promise<QueryResult> {
    return this.request<QueryResult>('/query', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ query_type: queryType, epsilon, delta }),
    })
  }
}
