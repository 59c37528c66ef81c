import { describe, expect, it } from 'vitest'

import type { LedgerPage, QueryResult, SpendReportInfo } from '../src/types.js'
import {
  escapeHtml,
  formatNumber,
  renderBudget,
  renderCostChart,
  renderError,
  renderLedgerTable,
  renderResult,
  renderTypeOptions,
  renderVerify,
} from '../src/view.js'

const RESULT: QueryResult = {
  noisy_value: 41234.5,
  sigma: 877.4,
  case_tag: 'exact_reuse',
  reuse_ref: 3,
  eps_squared_cost: 0,
  eps_squared_remaining: 63,
  record_index: 7,
  server_accessed: false,
}

describe('renderTypeOptions', () => {
  it('lists registered types with sensitivities', () => {
    const html = renderTypeOptions([
      { name: 'average_income', kind: 'average', sensitivity: 202 },
    ])
    expect(html).toContain('average_income')
    expect(html).toContain('sensitivity 202')
  })

  it('explains an empty registry', () => {
    expect(renderTypeOptions([])).toContain('no query types registered')
  })
})

describe('renderResult', () => {
  it('marks free reuse cases with a zero-cost badge', () => {
    const html = renderResult(RESULT)
    expect(html).toContain('reused, zero cost')
    expect(html).toContain('of record 3')
    expect(html).toContain('badge-free')
    expect(html).toContain('#7')
  })

  it('fresh answers are not marked free', () => {
    const html = renderResult({ ...RESULT, case_tag: 'fresh', reuse_ref: null, eps_squared_cost: 1.2 })
    expect(html).toContain('fresh answer')
    expect(html).not.toContain('badge-free')
  })

  it('renders a placeholder before any query', () => {
    expect(renderResult(null)).toContain('no query submitted yet')
  })
})

describe('renderError', () => {
  it('shows the server message verbatim plus the remaining budget', () => {
    const html = renderError({
      code: 'insufficient_budget',
      message: 'insufficient privacy budget: cost 9 exceeds remaining 0.5',
      eps_squared_remaining: 0.5,
    })
    expect(html).toContain('insufficient_budget')
    expect(html).toContain('insufficient privacy budget: cost 9 exceeds remaining 0.5')
    expect(html).toContain('remaining')
  })

  it('escapes markup in messages', () => {
    const html = renderError({ code: 'x', message: '<script>alert(1)</script>' })
    expect(html).not.toContain('<script>')
    expect(html).toContain('&lt;script&gt;')
  })

  it('renders nothing without an error', () => {
    expect(renderError(null)).toBe('')
  })
})

describe('renderBudget', () => {
  it('shows both the squared balance and the epsilon equivalent', () => {
    const html = renderBudget({
      eps_squared_budget: 64,
      eps_squared_remaining: 16,
      delta_budget: 1e-4,
      epsilon_budget: 8,
      epsilon_remaining: 4,
    })
    expect(html).toContain('16')
    expect(html).toContain('64')
    expect(html).toContain('4')
    expect(html).toContain('width:75.00%')
  })
})

describe('renderLedgerTable', () => {
  const page: LedgerPage = {
    total: 2,
    offset: 0,
    records: [0, 1].map((i) => ({
      index: i,
      dataset_hash: 'ab'.repeat(32),
      query_type: 'average_income',
      epsilon: 1,
      delta: 1e-4,
      sigma: 877.4,
      noisy_response: 41000 + i,
      eps_squared_cost: i === 0 ? 1 : 0,
      case_tag: i === 0 ? 'fresh' : 'exact_reuse',
      reuse_ref: i === 0 ? null : 0,
      timestamp: 1700000000000,
      prev_hash: '00'.repeat(32),
      record_hash: 'cd'.repeat(32),
    })),
  }

  it('renders one row per record with a hash prefix', () => {
    const html = renderLedgerTable(page)
    expect(html.match(/<tr>/g)?.length).toBe(3) // header + 2 rows
    expect(html).toContain('cdcdcdcdcdcd')
    expect(html).toContain('2 of 2 records')
  })

  it('renders an empty state', () => {
    expect(renderLedgerTable(null)).toContain('ledger is empty')
    expect(renderLedgerTable({ total: 0, offset: 0, records: [] })).toContain(
      'ledger is empty',
    )
  })
})

describe('renderVerify', () => {
  it('reports success and failure with the failing index', () => {
    expect(renderVerify({ ok: true, first_bad_index: null })).toContain('intact')
    expect(renderVerify({ ok: false, first_bad_index: 5 })).toContain('FAILED at record 5')
  })
})

describe('renderCostChart', () => {
  it('draws both cumulative series', () => {
    const report: SpendReportInfo = {
      eps_squared_spent_ours: 2,
      eps_ours: 1.4,
      eps_squared_naive: 4,
      eps_naive: 2,
      per_query: [0, 1, 2].map((i) => ({
        index: i,
        query_type: 'average_income',
        case_tag: 'fresh',
        eps_squared_cost: 1,
        cum_eps_squared_ours: i + 1,
        cum_eps_ours: Math.sqrt(i + 1),
        cum_eps_naive: Math.sqrt(2 * (i + 1)),
      })),
    }
    const html = renderCostChart(report)
    expect(html).toContain('line-ours')
    expect(html).toContain('line-naive')
    expect(html).toContain('<svg')
  })

  it('renders an empty state', () => {
    expect(renderCostChart(null)).toContain('no releases yet')
  })
})

describe('helpers', () => {
  it('escapeHtml covers the critical characters', () => {
    expect(escapeHtml(`<a href="x">&'</a>`)).toBe(
      '&lt;a href=&quot;x&quot;&gt;&amp;&#39;&lt;/a&gt;',
    )
  })

  it('formatNumber is compact but faithful', () => {
    expect(formatNumber(0)).toBe('0')
    expect(formatNumber(0.0002)).toBe('0.0002')
    expect(formatNumber(1234567)).toBe('1.2346e+6')
    expect(formatNumber(18.866967846580785)).toBe('18.867')
  })
})
