/**
 * Production plans get a table per product: quantities by period, plus an
 * order fulfilment list. Quantities, not intervals, so no Gantt here.
 */
import { ProductionPlan } from "./schemas";

export interface ProductPeriodRow {
  product: string;
  period: number;
  produced: number;
  shipped: number;
  held: number;
}

export interface OrderRow {
  order: string;
  delivered: number;
  shorted: number;
}

export interface ProductionTable {
  rows: ProductPeriodRow[];
  orders: OrderRow[];
}

function splitKey(key: string): [string, string, number] {
  const parts = key.split(",");
  const t = Number(parts[parts.length - 1]);
  return [parts[0], parts.slice(1, -1).join(","), t];
}

export function buildProductionTable(plan: ProductionPlan): ProductionTable {
  const agg = new Map<string, ProductPeriodRow>();
  const touch = (product: string, period: number): ProductPeriodRow => {
    const key = `${product}@${period}`;
    let row = agg.get(key);
    if (!row) {
      row = { product, period, produced: 0, shipped: 0, held: 0 };
      agg.set(key, row);
    }
    return row;
  };
  for (const [key, qty] of Object.entries(plan.production)) {
    const [, product, t] = splitKey(key);
    touch(product, t).produced += qty;
  }
  for (const [key, qty] of Object.entries(plan.shipments)) {
    // shipments are keyed origin,dest,product,period
    const parts = key.split(",");
    touch(parts[2], Number(parts[3])).shipped += qty;
  }
  for (const [key, qty] of Object.entries(plan.inventory)) {
    const [, product, t] = splitKey(key);
    touch(product, t).held += qty;
  }
  const rows = [...agg.values()].sort(
    (a, b) => a.product.localeCompare(b.product) || a.period - b.period,
  );
  const orders = Object.keys(plan.deliveries)
    .sort()
    .map((order) => ({
      order,
      delivered: plan.deliveries[order] ?? 0,
      shorted: plan.shortfalls[order] ?? 0,
    }));
  return { rows, orders };
}
