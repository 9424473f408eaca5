export interface MatchedTerm {
  code: string;
  label: string;
  score: number;
}

export interface RankedTerm {
  code: string;
  label: string;
  sim_query: number;
  sim_best: number;
  combined: number;
  rank: number;
}

export interface QueryResponse {
  phrase: string;
  cutoff: number;
  match: {
    method: 'LEXICAL' | 'SEMANTIC';
    matched: MatchedTerm[];
  };
  terms: RankedTerm[];
  split_value: number;
  total_retained: number;
}

export interface InfoResponse {
  vocab_version: string;
  term_count: number;
  provider_id: string;
  dims: number;
  default_cutoff: number;
  cutoff_grid: number[];
  build_info: string;
}

export type Decision = 'UNDECIDED' | 'ACCEPTED' | 'REJECTED';
