import type { CatalogField } from './types';
import type { FilterFormState, NumericChoice } from './queryBuilder';
import { emptyState } from './queryBuilder';

const NUMERIC_CHOICES: { value: NumericChoice; label: string }[] = [
  { value: 'any', label: 'any' },
  { value: 'zero', label: 'equal to zero' },
  { value: 'positive', label: 'greater than zero' },
];

export interface FilterForm {
  element: HTMLFormElement;
  readState(): FilterFormState;
}

/**
 * Builds the filter form from the field catalog: a pragma version dropdown
 * plus one any/zero/positive selector per numeric field. The catalog drives
 * the field list, so new server-side metrics appear without code changes.
 */
export function createFilterForm(
  doc: Document,
  catalog: CatalogField[],
  pragmaOptions: string[],
  onSubmit: () => void
): FilterForm {
  const numericFields = catalog
    .filter((f) => f.kind === 'number')
    .map((f) => f.name)
    .sort();

  const form = doc.createElement('form');
  form.id = 'filter-form';

  const pragmaSelect = doc.createElement('select');
  pragmaSelect.name = 'pragma';
  pragmaSelect.id = 'filter-pragma';
  const anyVersion = doc.createElement('option');
  anyVersion.value = '';
  anyVersion.textContent = 'any version';
  pragmaSelect.appendChild(anyVersion);
  for (const version of pragmaOptions) {
    const option = doc.createElement('option');
    option.value = version;
    option.textContent = version;
    pragmaSelect.appendChild(option);
  }
  form.appendChild(labelled(doc, 'pragma', pragmaSelect));

  const numericSelects = new Map<string, HTMLSelectElement>();
  for (const field of numericFields) {
    const select = doc.createElement('select');
    select.name = field;
    select.id = `filter-${field}`;
    for (const { value, label } of NUMERIC_CHOICES) {
      const option = doc.createElement('option');
      option.value = value;
      option.textContent = label;
      select.appendChild(option);
    }
    numericSelects.set(field, select);
    form.appendChild(labelled(doc, field, select));
  }

  const submit = doc.createElement('button');
  submit.type = 'submit';
  submit.id = 'filter-submit';
  submit.textContent = 'Search';
  form.appendChild(submit);

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    onSubmit();
  });

  function readState(): FilterFormState {
    const state = emptyState(numericFields);
    state.pragma = pragmaSelect.value;
    for (const [field, select] of numericSelects) {
      state.numeric[field] = { choice: select.value as NumericChoice };
    }
    return state;
  }

  return { element: form, readState };
}

function labelled(doc: Document, text: string, control: HTMLElement): HTMLLabelElement {
  const label = doc.createElement('label');
  label.textContent = text + ' ';
  label.appendChild(control);
  return label;
}
