export const SERVER_PORT = 8646;
export const BASE_URL = `http://127.0.0.1:${SERVER_PORT}`;

/** Prompts with recorded fixtures (replay mode serves only these). */
export const FULL_PROMPT = "a loading spinner: a ring that spins with a soft blue leading edge";
export const INCREMENTAL_PROMPT = "slow the spin down to 2 seconds and make the leading edge green";

/** Unmet item the server's mock analyzer reports on its first verdict; the
 * follow-up generation for it is part of the recorded fixture set. */
export const CORRECTION_UNMET = "the ring should pulse while spinning";
