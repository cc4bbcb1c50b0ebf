// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "bpf_defs.h"

struct {
	__uint(type, BPF_MAP_TYPE_ARRAY);
	__uint(max_entries, 1);
	__type(key, __u32);
	__type(value, __u64);
} call_count SEC(".maps");

SEC("uprobe/fixture_user_fn")
int count_call(void *ctx)
{
	__u32 key = 0;
	__u64 *v = bpf_map_lookup_elem(&call_count, &key);

	if (v)
		*v += 1;
	return 0;
}

char LICENSE[] SEC("license") = "Dual BSD/GPL";
