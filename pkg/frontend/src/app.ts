import { ApiClient, ApiError } from './api';
import { buildQuery } from './queryBuilder';
import { createFilterForm } from './form';
import { createResultTable } from './table';

/**
 * Wires the filter form, result table, and download button into the given
 * root element. All data comes from the corpus HTTP service at baseUrl.
 */
export async function startApp(
  doc: Document,
  root: HTMLElement,
  baseUrl: string
): Promise<void> {
  const client = new ApiClient(baseUrl);

  const [catalog, pragmaOptions] = await Promise.all([
    client.fetchCatalog(),
    client.fetchPragmaOptions(),
  ]);

  const table = createResultTable(doc);

  const form = createFilterForm(doc, catalog, pragmaOptions, () => {
    void runSearch();
  });

  const download = doc.createElement('button');
  download.id = 'download-selected';
  download.textContent = 'Download selected';
  download.disabled = true;
  download.addEventListener('click', () => {
    void downloadSelected();
  });
  table.element.addEventListener('change', () => {
    download.disabled = table.selectedAddresses().length === 0;
  });

  root.textContent = '';
  root.appendChild(form.element);
  root.appendChild(download);
  root.appendChild(table.element);

  async function runSearch(): Promise<void> {
    download.disabled = true;
    let body;
    try {
      body = await client.runQuery(buildQuery(form.readState()));
    } catch (err) {
      if (err instanceof DOMException && err.name === 'AbortError') {
        return; // superseded by a newer search
      }
      table.renderError(err instanceof ApiError ? err.message : String(err));
      return;
    }
    if (body.errors?.length) {
      table.renderError(body.errors[0].message);
      return;
    }
    table.render(body.data?.metrics ?? [], body.truncated === true);
  }

  async function downloadSelected(): Promise<void> {
    const addresses = table.selectedAddresses();
    if (addresses.length === 0) {
      return;
    }
    const blob = await client.downloadArchive(addresses);
    const url = URL.createObjectURL(blob);
    const anchor = doc.createElement('a');
    anchor.href = url;
    anchor.download = 'contracts.zip';
    anchor.click();
    URL.revokeObjectURL(url);
  }

  await runSearch(); // initial unfiltered listing
}
