import { describe, expect, it } from 'vitest'

import {
  canSubmit,
  initialState,
  onBudget,
  onFormChange,
  onQueryFailure,
  onQuerySuccess,
  onRegistry,
  onSubmitStarted,
} from '../src/state.js'
import type { BudgetInfo, QueryResult, QueryTypeInfo } from '../src/types.js'

const REGISTRY: QueryTypeInfo[] = [
  { name: 'average_income', kind: 'average', sensitivity: 202 },
  { name: 'frequency_over_60', kind: 'frequency', sensitivity: 0.0002 },
]

const BUDGET: BudgetInfo = {
  eps_squared_budget: 64,
  eps_squared_remaining: 64,
  delta_budget: 1e-4,
  epsilon_budget: 8,
  epsilon_remaining: 8,
}

const RESULT: QueryResult = {
  noisy_value: 41234.5,
  sigma: 877.4,
  case_tag: 'fresh',
  reuse_ref: null,
  eps_squared_cost: 1.0,
  eps_squared_remaining: 63.0,
  record_index: 0,
  server_accessed: true,
}

const ready = () =>
  onBudget(onRegistry(initialState(), REGISTRY), BUDGET)

describe('state transitions', () => {
  it('registry selects the first type by default', () => {
    const s = onRegistry(initialState(), REGISTRY)
    expect(s.form.queryType).toBe('average_income')
  })

  it('a success stores the result and adopts the returned balance', () => {
    const s = onQuerySuccess(onSubmitStarted(ready()), RESULT)
    expect(s.pending).toBe(false)
    expect(s.lastResult).toEqual(RESULT)
    expect(s.lastError).toBeNull()
    expect(s.budget?.eps_squared_remaining).toBe(63.0)
  })

  it('a failure stores the error payload and clears pending', () => {
    const s = onQueryFailure(onSubmitStarted(ready()), {
      code: 'insufficient_budget',
      message: 'insufficient privacy budget',
      eps_squared_remaining: 0.5,
    })
    expect(s.pending).toBe(false)
    expect(s.lastError?.code).toBe('insufficient_budget')
    expect(s.budget?.eps_squared_remaining).toBe(64)
  })
})

describe('canSubmit', () => {
  it('allows a valid form with ample budget', () => {
    expect(canSubmit(ready())).toBe(true)
  })

  it('blocks while a request is pending', () => {
    expect(canSubmit(onSubmitStarted(ready()))).toBe(false)
  })

  it('blocks before the registry or budget arrive', () => {
    expect(canSubmit(initialState())).toBe(false)
    expect(canSubmit(onRegistry(initialState(), REGISTRY))).toBe(false)
  })

  it('blocks invalid parameters', () => {
    expect(canSubmit(onFormChange(ready(), { epsilonText: '0' }))).toBe(false)
    expect(canSubmit(onFormChange(ready(), { deltaText: '1' }))).toBe(false)
    expect(canSubmit(onFormChange(ready(), { queryType: 'unregistered' }))).toBe(false)
  })

  it('blocks when the remaining budget cannot cover a worst-case charge', () => {
    // at delta == delta_budget the fresh charge is epsilon^2 = 9 > 0.5
    const drained = onBudget(ready(), { ...BUDGET, eps_squared_remaining: 0.5 })
    const s = onFormChange(drained, { epsilonText: '3.0', deltaText: '1e-4' })
    expect(canSubmit(s)).toBe(false)
    // a small enough request still goes through
    const tiny = onFormChange(drained, { epsilonText: '0.5', deltaText: '1e-4' })
    expect(canSubmit(tiny)).toBe(true)
  })
})
