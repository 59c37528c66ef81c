// Console state and its pure transitions.  The state stores raw API
// payloads; rendering happens in view.ts and performs no arithmetic beyond
// formatting, so every displayed figure traces back to a server response.

import type {
  ApiError,
  BudgetInfo,
  LedgerPage,
  QueryResult,
  QueryTypeInfo,
  SpendReportInfo,
  VerifyResult,
} from './types.js'
import { estimateFreshCost, validateForm, type FormInput } from './validation.js'

export interface ConsoleState {
  registry: QueryTypeInfo[]
  budget: BudgetInfo | null
  ledger: LedgerPage | null
  report: SpendReportInfo | null
  verify: VerifyResult | null
  pending: boolean
  lastResult: QueryResult | null
  lastError: ApiError | null
  form: FormInput
}

export const initialState = (): ConsoleState => ({
  registry: [],
  budget: null,
  ledger: null,
  report: null,
  verify: null,
  pending: false,
  lastResult: null,
  lastError: null,
  form: { queryType: null, epsilonText: '1.0', deltaText: '1e-4' },
})

export const onRegistry = (s: ConsoleState, registry: QueryTypeInfo[]): ConsoleState => {
  const queryType =
    s.form.queryType && registry.some((q) => q.name === s.form.queryType)
      ? s.form.queryType
      : (registry[0]?.name ?? null)
  return { ...s, registry, form: { ...s.form, queryType } }
}

export const onBudget = (s: ConsoleState, budget: BudgetInfo): ConsoleState => ({
  ...s,
  budget,
})

export const onLedger = (s: ConsoleState, ledger: LedgerPage): ConsoleState => ({
  ...s,
  ledger,
})

export const onReport = (s: ConsoleState, report: SpendReportInfo): ConsoleState => ({
  ...s,
  report,
})

export const onVerify = (s: ConsoleState, verify: VerifyResult): ConsoleState => ({
  ...s,
  verify,
})

export const onFormChange = (s: ConsoleState, patch: Partial<FormInput>): ConsoleState => ({
  ...s,
  form: { ...s.form, ...patch },
})

export const onSubmitStarted = (s: ConsoleState): ConsoleState => ({
  ...s,
  pending: true,
  lastError: null,
})

export const onQuerySuccess = (s: ConsoleState, result: QueryResult): ConsoleState => ({
  ...s,
  pending: false,
  lastResult: result,
  lastError: null,
  // the response carries the authoritative post-charge balance
  budget: s.budget
    ? { ...s.budget, eps_squared_remaining: result.eps_squared_remaining }
    : s.budget,
})

export const onQueryFailure = (s: ConsoleState, error: ApiError): ConsoleState => ({
  ...s,
  pending: false,
  lastError: error,
})

// Submit is blocked while a request is in flight, while the form would be
// rejected by the server, and when the remaining budget cannot cover even a
// worst-case fresh charge for the requested parameters.
export const canSubmit = (s: ConsoleState): boolean => {
  if (s.pending || s.budget === null) return false
  const check = validateForm(
    s.form,
    s.registry.map((q) => q.name),
  )
  if (!check.ok || check.epsilon === undefined || check.delta === undefined) return false
  const estimate = estimateFreshCost(check.epsilon, check.delta, s.budget.delta_budget)
  return s.budget.eps_squared_remaining >= estimate
}
