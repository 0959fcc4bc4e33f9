export type FieldKind = 'number' | 'string' | 'address' | 'timestamp';

export interface CatalogField {
  name: string;
  kind: FieldKind;
}

export type Row = Record<string, string | number>;

export interface QueryResponse {
  data?: { metrics: Row[] };
  errors?: { message: string }[];
  truncated?: boolean;
}

export interface DailyCount {
  date: string;
  count: number;
}
