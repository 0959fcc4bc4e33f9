// Maps filter form state to a query document for POST /graphql.
// Identical states must always serialize to the identical document.

export type NumericChoice = 'any' | 'zero' | 'positive' | 'custom';

export interface NumericFilter {
  choice: NumericChoice;
  // advanced free-form input, used only when choice === 'custom'
  customOp?: 'eq' | 'ne' | 'gt' | 'gte' | 'lt' | 'lte';
  customValue?: number;
}

export interface FilterFormState {
  pragma: string; // '' means "any version"
  numeric: Record<string, NumericFilter>;
}

export const DISPLAY_COLUMNS = [
  'pragma',
  'sloc',
  'functions',
  'payable',
  'transactions',
];

export function emptyState(numericFields: string[]): FilterFormState {
  const numeric: Record<string, NumericFilter> = {};
  for (const field of numericFields) {
    numeric[field] = { choice: 'any' };
  }
  return { pragma: '', numeric };
}

export function buildPredicates(
  state: FilterFormState
): Record<string, string | number> {
  const predicates: Record<string, string | number> = {};
  if (state.pragma !== '') {
    predicates['pragma_eq'] = state.pragma;
  }
  for (const field of Object.keys(state.numeric).sort()) {
    const filter = state.numeric[field];
    if (filter.choice === 'zero') {
      predicates[`${field}_eq`] = 0;
    } else if (filter.choice === 'positive') {
      predicates[`${field}_gt`] = 0;
    } else if (
      filter.choice === 'custom' &&
      filter.customOp !== undefined &&
      filter.customValue !== undefined &&
      Number.isFinite(filter.customValue)
    ) {
      predicates[`${field}_${filter.customOp}`] = filter.customValue;
    }
  }
  return predicates;
}

export function buildQuery(state: FilterFormState): string {
  const predicates = buildPredicates(state);
  const filters = Object.entries(predicates)
    .map(([key, value]) =>
      typeof value === 'string' ? `${key}: ${JSON.stringify(value)}` : `${key}: ${value}`
    )
    .join(', ');
  const selection = ['contractAddress', ...DISPLAY_COLUMNS].join(' ');
  return `{ metrics(query:{${filters}}) { ${selection} } }`;
}
