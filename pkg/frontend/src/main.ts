// DOM wiring: binds the pure state/view modules to the page and polls the
// service every 2 seconds for budget, ledger and report updates.

import { ApiClient, ApiRequestError } from './api.js'
import {
  canSubmit,
  initialState,
  onBudget,
  onFormChange,
  onLedger,
  onQueryFailure,
  onQuerySuccess,
  onRegistry,
  onReport,
  onSubmitStarted,
  onVerify,
  type ConsoleState,
} from './state.js'
import { validateDelta, validateEpsilon } from './validation.js'
import {
  renderBudget,
  renderCostChart,
  renderError,
  renderLedgerTable,
  renderResult,
  renderTypeOptions,
  renderVerify,
} from './view.js'

const POLL_INTERVAL_MS = 2000
const LEDGER_PAGE_SIZE = 50

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

let state: ConsoleState = initialState()
let client = new ApiClient(resolveBaseUrl())

function resolveBaseUrl(): string {
  return localStorage.getItem('dpledger-api') ?? 'http://127.0.0.1:8080'
}

function update(next: ConsoleState): void {
  state = next
  render()
}

function render(): void {
  el<HTMLDivElement>('budget').innerHTML = renderBudget(state.budget)
  el<HTMLDivElement>('result').innerHTML = renderResult(state.lastResult)
  el<HTMLDivElement>('error').innerHTML = renderError(state.lastError)
  el<HTMLDivElement>('ledger').innerHTML = renderLedgerTable(state.ledger)
  el<HTMLDivElement>('verify-result').innerHTML = renderVerify(state.verify)
  el<HTMLDivElement>('chart').innerHTML = renderCostChart(state.report)
  el<HTMLButtonElement>('submit').disabled = !canSubmit(state)

  const epsCheck = validateEpsilon(state.form.epsilonText)
  const delCheck = validateDelta(state.form.deltaText)
  el<HTMLSpanElement>('epsilon-error').textContent = epsCheck.error ?? ''
  el<HTMLSpanElement>('delta-error').textContent = delCheck.error ?? ''
}

async function refreshRegistry(): Promise<void> {
  const registry = await client.getQueryTypes()
  const select = el<HTMLSelectElement>('query-type')
  select.innerHTML = renderTypeOptions(registry)
  update(onRegistry(state, registry))
  if (state.form.queryType) select.value = state.form.queryType
}

async function poll(): Promise<void> {
  try {
    const [budget, ledger, report] = await Promise.all([
      client.getBudget(),
      client.getLedger(0, LEDGER_PAGE_SIZE),
      client.getReport(),
    ])
    update(onReport(onLedger(onBudget(state, budget), ledger), report))
  } catch {
    // transient poll failures leave the last good snapshot on screen
  }
}

async function submit(): Promise<void> {
  if (!canSubmit(state)) return
  const { queryType, epsilonText, deltaText } = state.form
  update(onSubmitStarted(state))
  try {
    const result = await client.submitQuery(
      queryType as string,
      Number(epsilonText),
      Number(deltaText),
    )
    update(onQuerySuccess(state, result))
    await poll()
  } catch (err) {
    if (err instanceof ApiRequestError) {
      update(onQueryFailure(state, err.payload))
    } else {
      update(
        onQueryFailure(state, {
          code: 'network',
          message: 'request failed; the service may be unreachable — retry',
        }),
      )
    }
  }
}

async function verify(): Promise<void> {
  try {
    update(onVerify(state, await client.verifyChain()))
  } catch {
    update(onVerify(state, { ok: false, first_bad_index: null }))
  }
}

function bind(): void {
  el<HTMLSelectElement>('query-type').addEventListener('change', (event) => {
    update(onFormChange(state, { queryType: (event.target as HTMLSelectElement).value }))
  })
  el<HTMLInputElement>('epsilon').addEventListener('input', (event) => {
    update(onFormChange(state, { epsilonText: (event.target as HTMLInputElement).value }))
  })
  el<HTMLInputElement>('delta').addEventListener('input', (event) => {
    update(onFormChange(state, { deltaText: (event.target as HTMLInputElement).value }))
  })
  el<HTMLFormElement>('query-form').addEventListener('submit', (event) => {
    event.preventDefault()
    void submit()
  })
  el<HTMLButtonElement>('verify-button').addEventListener('click', () => void verify())
  const apiInput = el<HTMLInputElement>('api-base')
  apiInput.value = client.baseUrl
  el<HTMLButtonElement>('api-apply').addEventListener('click', () => {
    localStorage.setItem('dpledger-api', apiInput.value)
    client = new ApiClient(apiInput.value)
    void refreshRegistry().then(poll)
  })
}

async function start(): Promise<void> {
  bind()
  const epsilonInput = el<HTMLInputElement>('epsilon')
  const deltaInput = el<HTMLInputElement>('delta')
  epsilonInput.value = state.form.epsilonText
  deltaInput.value = state.form.deltaText
  try {
    await refreshRegistry()
  } catch {
    update(
      onQueryFailure(state, {
        code: 'network',
        message: `cannot reach the service at ${client.baseUrl}; set the API address above`,
      }),
    )
  }
  await poll()
  setInterval(() => void poll(), POLL_INTERVAL_MS)
}

document.addEventListener('DOMContentLoaded', () => void start())
