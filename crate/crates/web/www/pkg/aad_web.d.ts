/* tslint:disable */
/* eslint-disable */

/**
 * Three-talker classification of simulated test trials.
 */
export class AttentionDemo {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly accuracy: number;
    /**
     * 1 for each correctly classified trial.
     */
    readonly correct: Uint8Array;
    readonly lambda: number;
    /**
     * Row-major `trials x 3` correlations; column 0 is the attended talker.
     */
    readonly r_values: Float64Array;
}

/**
 * Envelope of an amplitude-modulated tone next to the true modulator.
 */
export class EnvelopeDemo {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly correlation: number;
    /**
     * Extracted envelope at 128 Hz, in `[0, 1]`.
     */
    readonly envelope: Float64Array;
    /**
     * Modulator sampled at 128 Hz and normalized to `[0, 1]`.
     */
    readonly reference: Float64Array;
}

/**
 * Leave-one-out reconstruction accuracy across the lambda grid.
 */
export class LambdaSweep {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly grid: Float64Array;
    readonly mean_r: Float64Array;
    readonly selected: number;
}

export function attention_demo(snr_db: number, leakage: number, seed: bigint): AttentionDemo;

export function envelope_demo(carrier_hz: number, mod_hz: number, depth: number, duration_s: number): EnvelopeDemo;

export function lambda_sweep(snr_db: number, seed: bigint): LambdaSweep;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_attentiondemo_free: (a: number, b: number) => void;
    readonly __wbg_envelopedemo_free: (a: number, b: number) => void;
    readonly __wbg_lambdasweep_free: (a: number, b: number) => void;
    readonly attention_demo: (a: number, b: number, c: bigint) => [number, number, number];
    readonly attentiondemo_accuracy: (a: number) => number;
    readonly attentiondemo_correct: (a: number) => [number, number];
    readonly attentiondemo_lambda: (a: number) => number;
    readonly attentiondemo_r_values: (a: number) => [number, number];
    readonly envelope_demo: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly envelopedemo_correlation: (a: number) => number;
    readonly envelopedemo_envelope: (a: number) => [number, number];
    readonly envelopedemo_reference: (a: number) => [number, number];
    readonly lambda_sweep: (a: number, b: bigint) => [number, number, number];
    readonly lambdasweep_grid: (a: number) => [number, number];
    readonly lambdasweep_mean_r: (a: number) => [number, number];
    readonly lambdasweep_selected: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
