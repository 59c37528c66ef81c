// Client-side form checks.  Deliberately a strict subset of the server's
// parameter validation: anything accepted here (epsilon > 0 and finite,
// 0 < delta < 1, a registered type selected) is accepted by the server.

export interface FieldCheck {
  value?: number
  error?: string
}

export const validateEpsilon = (text: string): FieldCheck => {
  const value = Number(text)
  if (text.trim() === '' || Number.isNaN(value)) {
    return { error: 'epsilon must be a number' }
  }
  if (!Number.isFinite(value) || value <= 0) {
    return { error: 'epsilon must be positive and finite' }
  }
  return { value }
}

export const validateDelta = (text: string): FieldCheck => {
  const value = Number(text)
  if (text.trim() === '' || Number.isNaN(value)) {
    return { error: 'delta must be a number' }
  }
  if (!(value > 0 && value < 1)) {
    return { error: 'delta must be in (0, 1)' }
  }
  return { value }
}

export interface FormInput {
  queryType: string | null
  epsilonText: string
  deltaText: string
}

export interface FormCheck {
  ok: boolean
  epsilon?: number
  delta?: number
  errors: { queryType?: string; epsilon?: string; delta?: string }
}

export const validateForm = (form: FormInput, registeredNames: string[]): FormCheck => {
  const errors: FormCheck['errors'] = {}
  if (!form.queryType || !registeredNames.includes(form.queryType)) {
    errors.queryType = 'choose a registered query type'
  }
  const eps = validateEpsilon(form.epsilonText)
  if (eps.error) errors.epsilon = eps.error
  const del = validateDelta(form.deltaText)
  if (del.error) errors.delta = del.error
  const ok = Object.keys(errors).length === 0
  return ok ? { ok, epsilon: eps.value, delta: del.value, errors } : { ok, errors }
}

// Worst-case (fresh) charge of a prospective request in the epsilon-squared
// budget currency.  Used only to disable the submit control before the
// request is even sent; the server's own check remains authoritative and a
// reused answer may cost less.
export const estimateFreshCost = (
  epsilon: number,
  delta: number,
  deltaBudget: number,
): number => (epsilon * epsilon * Math.log(1.25 / deltaBudget)) / Math.log(1.25 / delta)
