// HTML string builders.  Kept DOM-free so they are unit-testable; main.ts
// assigns the results to innerHTML.

import type {
  ApiError,
  BudgetInfo,
  LedgerPage,
  QueryResult,
  QueryTypeInfo,
  SpendReportInfo,
  VerifyResult,
} from './types.js'

export const escapeHtml = (text: string): string =>
  text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;')

export const formatNumber = (x: number): string => {
  if (x === 0) return '0'
  const magnitude = Math.abs(x)
  if (magnitude >= 1e6 || magnitude < 1e-4) return x.toExponential(4)
  return String(Number(x.toPrecision(6)))
}

const CASE_LABELS: Record<QueryResult['case_tag'], string> = {
  fresh: 'fresh answer',
  exact_reuse: 'reused, zero cost',
  partial_reuse: 'partially reused',
  full_reuse: 'reused, zero cost',
}

export const renderTypeOptions = (registry: QueryTypeInfo[]): string => {
  if (registry.length === 0) {
    return '<option value="" disabled selected>no query types registered</option>'
  }
  return registry
    .map(
      (q) =>
        `<option value="${escapeHtml(q.name)}">${escapeHtml(q.name)} ` +
        `(sensitivity ${formatNumber(q.sensitivity)})</option>`,
    )
    .join('')
}

export const renderBudget = (budget: BudgetInfo | null): string => {
  if (budget === null) return '<p class="muted">budget not loaded</p>'
  const used = budget.eps_squared_budget - budget.eps_squared_remaining
  const percent =
    budget.eps_squared_budget > 0
      ? Math.min(100, Math.max(0, (used / budget.eps_squared_budget) * 100))
      : 0
  return (
    `<div class="gauge"><div class="gauge-fill" style="width:${percent.toFixed(2)}%"></div></div>` +
    `<p><strong>${formatNumber(budget.eps_squared_remaining)}</strong> of ` +
    `${formatNumber(budget.eps_squared_budget)} &epsilon;&sup2; remaining ` +
    `(&epsilon; equivalent ${formatNumber(budget.epsilon_remaining)} at ` +
    `&delta; ${formatNumber(budget.delta_budget)})</p>`
  )
}

export const renderResult = (result: QueryResult | null): string => {
  if (result === null) return '<p class="muted">no query submitted yet</p>'
  const badgeClass = result.eps_squared_cost === 0 ? 'badge badge-free' : 'badge'
  const reuse =
    result.reuse_ref === null ? '' : ` of record ${result.reuse_ref}`
  return (
    `<p><span class="${badgeClass}">${CASE_LABELS[result.case_tag]}${reuse}</span></p>` +
    `<table class="kv">` +
    `<tr><td>noisy value</td><td>${formatNumber(result.noisy_value)}</td></tr>` +
    `<tr><td>noise scale &sigma;</td><td>${formatNumber(result.sigma)}</td></tr>` +
    `<tr><td>charged &epsilon;&sup2;</td><td>${formatNumber(result.eps_squared_cost)}</td></tr>` +
    `<tr><td>remaining &epsilon;&sup2;</td><td>${formatNumber(result.eps_squared_remaining)}</td></tr>` +
    `<tr><td>record</td><td>#${result.record_index}</td></tr>` +
    `<tr><td>dataset accessed</td><td>${result.server_accessed ? 'yes' : 'no'}</td></tr>` +
    `</table>`
  )
}

export const renderError = (error: ApiError | null): string => {
  if (error === null) return ''
  const remaining =
    error.eps_squared_remaining === undefined
      ? ''
      : `<p>remaining &epsilon;&sup2;: <strong>${formatNumber(error.eps_squared_remaining)}</strong></p>`
  return (
    `<div class="error-box"><p><strong>${escapeHtml(error.code)}</strong>: ` +
    `${escapeHtml(error.message)}</p>${remaining}</div>`
  )
}

export const renderLedgerTable = (page: LedgerPage | null): string => {
  if (page === null || page.total === 0) {
    return '<p class="muted">ledger is empty</p>'
  }
  const rows = page.records
    .map(
      (r) =>
        `<tr><td>${r.index}</td><td>${escapeHtml(r.query_type)}</td>` +
        `<td>${formatNumber(r.epsilon)}</td><td>${formatNumber(r.delta)}</td>` +
        `<td>${formatNumber(r.sigma)}</td><td>${escapeHtml(r.case_tag)}</td>` +
        `<td>${formatNumber(r.eps_squared_cost)}</td>` +
        `<td class="hash">${escapeHtml(r.record_hash.slice(0, 12))}&hellip;</td></tr>`,
    )
    .join('')
  return (
    `<table class="ledger"><thead><tr><th>#</th><th>type</th><th>&epsilon;</th>` +
    `<th>&delta;</th><th>&sigma;</th><th>case</th><th>cost</th><th>hash</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<p class="muted">${page.records.length} of ${page.total} records</p>`
  )
}

export const renderVerify = (verify: VerifyResult | null): string => {
  if (verify === null) return ''
  if (verify.ok) return '<p class="ok">chain verified: all records intact</p>'
  return `<p class="bad">chain verification FAILED at record ${verify.first_bad_index}</p>`
}

export const renderCostChart = (
  report: SpendReportInfo | null,
  width = 560,
  height = 180,
): string => {
  if (report === null || report.per_query.length === 0) {
    return '<p class="muted">no releases yet</p>'
  }
  const points = report.per_query
  const maxY = Math.max(...points.map((p) => p.cum_eps_naive), 1e-12)
  const x = (i: number) =>
    points.length === 1 ? width / 2 : (i / (points.length - 1)) * (width - 20) + 10
  const y = (v: number) => height - 10 - (v / maxY) * (height - 20)
  const path = (pick: (p: (typeof points)[number]) => number) =>
    points.map((p, i) => `${x(i).toFixed(1)},${y(pick(p)).toFixed(1)}`).join(' ')
  return (
    `<svg viewBox="0 0 ${width} ${height}" role="img" aria-label="cumulative privacy cost">` +
    `<polyline class="line-naive" fill="none" points="${path((p) => p.cum_eps_naive)}" />` +
    `<polyline class="line-ours" fill="none" points="${path((p) => p.cum_eps_ours)}" />` +
    `</svg>` +
    `<p class="muted">cumulative &epsilon;: with reuse ${formatNumber(report.eps_ours)}, ` +
    `fresh baseline ${formatNumber(report.eps_naive)}</p>`
  )
}
