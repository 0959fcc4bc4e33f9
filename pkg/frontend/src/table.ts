import type { Row } from './types';
import { DISPLAY_COLUMNS } from './queryBuilder';

export interface ResultTable {
  element: HTMLElement;
  render(rows: Row[], truncated: boolean): void;
  renderError(message: string): void;
  selectedAddresses(): string[];
}

/**
 * Result grid: one row per contract, address first, with a selection
 * checkbox per row feeding the archive download. Re-rendering clears any
 * previous selection.
 */
export function createResultTable(doc: Document): ResultTable {
  const container = doc.createElement('section');
  container.id = 'results';

  const banner = doc.createElement('p');
  banner.id = 'results-banner';
  banner.hidden = true;
  container.appendChild(banner);

  const table = doc.createElement('table');
  table.id = 'results-table';
  container.appendChild(table);

  function showBanner(kind: 'error' | 'truncated', message: string): void {
    banner.hidden = false;
    banner.className = kind;
    banner.textContent = message;
  }

  function render(rows: Row[], truncated: boolean): void {
    banner.hidden = true;
    table.textContent = '';

    const header = doc.createElement('tr');
    for (const column of ['', 'contractAddress', ...DISPLAY_COLUMNS]) {
      const cell = doc.createElement('th');
      cell.textContent = column;
      header.appendChild(cell);
    }
    table.appendChild(header);

    for (const row of rows) {
      const tr = doc.createElement('tr');
      const address = String(row['contractAddress'] ?? '');

      const pick = doc.createElement('td');
      const checkbox = doc.createElement('input');
      checkbox.type = 'checkbox';
      checkbox.className = 'row-select';
      checkbox.value = address;
      pick.appendChild(checkbox);
      tr.appendChild(pick);

      for (const column of ['contractAddress', ...DISPLAY_COLUMNS]) {
        const cell = doc.createElement('td');
        const value = row[column];
        cell.textContent = value === undefined ? '' : String(value);
        tr.appendChild(cell);
      }
      table.appendChild(tr);
    }

    if (truncated) {
      showBanner('truncated', 'Result set truncated by the server row limit.');
    }
  }

  function renderError(message: string): void {
    table.textContent = '';
    showBanner('error', message);
  }

  function selectedAddresses(): string[] {
    const boxes = table.querySelectorAll<HTMLInputElement>('input.row-select');
    return [...boxes].filter((box) => box.checked).map((box) => box.value);
  }

  return { element: container, render, renderError, selectedAddresses };
}
