// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "bpf_defs.h"

/* Synthetic xdp context. */
struct xdp_ctx {
	__u32 pkt_len;
} __attribute__((preserve_access_index));

struct {
	__uint(type, BPF_MAP_TYPE_ARRAY);
	__uint(max_entries, 4);
	__type(key, __u32);
	__type(value, __u64);
} pkt_stats SEC(".maps");

SEC("xdp")
int xdp_count(struct xdp_ctx *ctx)
{
	__u32 key = 0;
	__u64 *v = bpf_map_lookup_elem(&pkt_stats, &key);

	if (v)
		*v += ctx->pkt_len;
	return 2; /* XDP_PASS */
}

char LICENSE[] SEC("license") = "Dual BSD/GPL";
