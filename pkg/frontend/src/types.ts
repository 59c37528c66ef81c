// Wire types of the service HTTP JSON API.  The console renders these
// verbatim: every number shown on screen comes from one of these payloads.

export type CaseTag = 'fresh' | 'exact_reuse' | 'partial_reuse' | 'full_reuse'

export interface QueryTypeInfo {
  name: string
  kind: 'average' | 'frequency'
  sensitivity: number
  column?: string
  predicate?: string
  domain?: [number, number]
}

export interface BudgetInfo {
  eps_squared_budget: number
  eps_squared_remaining: number
  delta_budget: number
  epsilon_budget: number
  epsilon_remaining: number
}

export interface QueryResult {
  noisy_value: number
  sigma: number
  case_tag: CaseTag
  reuse_ref: number | null
  eps_squared_cost: number
  eps_squared_remaining: number
  record_index: number
  server_accessed: boolean
}

export interface LedgerRecord {
  index: number
  dataset_hash: string
  query_type: string
  epsilon: number
  delta: number
  sigma: number
  noisy_response: number
  eps_squared_cost: number
  case_tag: CaseTag
  reuse_ref: number | null
  timestamp: number
  prev_hash: string
  record_hash: string
}

export interface LedgerPage {
  total: number
  offset: number
  records: LedgerRecord[]
}

export interface VerifyResult {
  ok: boolean
  first_bad_index: number | null
}

export interface ReportPoint {
  index: number
  query_type: string
  case_tag: CaseTag
  eps_squared_cost: number
  cum_eps_squared_ours: number
  cum_eps_ours: number
  cum_eps_naive: number
}

export interface SpendReportInfo {
  eps_squared_spent_ours: number
  eps_ours: number
  eps_squared_naive: number
  eps_naive: number
  per_query: ReportPoint[]
}

export interface ApiError {
  code: string
  message: string
  eps_squared_remaining?: number
}
