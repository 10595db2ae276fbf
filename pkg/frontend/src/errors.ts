/** Input CSV does not match the sweep-result schema. */
export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatch";
  }
}

/** Figure filters matched nothing in the CSV. */
export class EmptySelection extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EmptySelection";
  }
}
