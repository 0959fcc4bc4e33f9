import type { CatalogField, DailyCount, QueryResponse } from './types';

const INTROSPECTION_QUERY = '{ __type(name: "metrics") { fields } }';
const PRAGMA_OPTIONS_QUERY = '{ metrics(query:{}) { pragma } }';

export class ApiError extends Error {}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(public baseUrl: string) {}

  private async postGraphql(query: string, signal?: AbortSignal): Promise<QueryResponse> {
    const response = await fetch(`${this.baseUrl}/graphql`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ query }),
      signal,
    });
    if (!response.ok) {
      throw new ApiError(`query endpoint returned HTTP ${response.status}`);
    }
    return (await response.json()) as QueryResponse;
  }

  async fetchCatalog(): Promise<CatalogField[]> {
    const body = (await this.postGraphql(INTROSPECTION_QUERY)) as {
      data?: { __type?: { fields: CatalogField[] } };
    };
    const fields = body.data?.__type?.fields;
    if (!fields) {
      throw new ApiError('introspection returned no field catalog');
    }
    return fields;
  }

  async fetchPragmaOptions(): Promise<string[]> {
    const body = await this.postGraphql(PRAGMA_OPTIONS_QUERY);
    const rows = body.data?.metrics ?? [];
    const distinct = new Set<string>();
    for (const row of rows) {
      const pragma = row['pragma'];
      if (typeof pragma === 'string' && pragma !== '') {
        distinct.add(pragma);
      }
    }
    return [...distinct].sort();
  }

  // At most one query in flight: a newer query cancels the previous one.
  async runQuery(query: string): Promise<QueryResponse> {
    this.inflight?.abort();
    this.inflight = new AbortController();
    return this.postGraphql(query, this.inflight.signal);
  }

  async downloadArchive(addresses: string[]): Promise<Blob> {
    const response = await fetch(`${this.baseUrl}/download`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ addresses }),
    });
    if (!response.ok) {
      throw new ApiError(`download returned HTTP ${response.status}`);
    }
    return response.blob();
  }

  async fetchDailyStats(): Promise<DailyCount[]> {
    const response = await fetch(`${this.baseUrl}/stats/daily`);
    if (!response.ok) {
      throw new ApiError(`stats returned HTTP ${response.status}`);
    }
    return (await response.json()) as DailyCount[];
  }

  artifactUrl(address: string, kind: 'source' | 'abi' | 'bytecode'): string {
    return `${this.baseUrl}/contracts/${address}/${kind}`;
  }
}
