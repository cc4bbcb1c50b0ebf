// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "bpf_defs.h"

/* Synthetic syscall-tracepoint context. */
struct open_ctx {
	int pid;
	int flags;
} __attribute__((preserve_access_index));

struct {
	__uint(type, BPF_MAP_TYPE_HASH);
	__uint(max_entries, 1024);
	__type(key, __u32);
	__type(value, __u64);
} open_count SEC(".maps");

SEC("tracepoint/syscalls/sys_enter_openat")
int count_open(struct open_ctx *ctx)
{
	__u32 pid = ctx->pid;
	__u64 one = 1;
	__u64 *cnt;

	cnt = bpf_map_lookup_elem(&open_count, &pid);
	if (cnt)
		*cnt += 1;
	else
		bpf_map_update_elem(&open_count, &pid, &one, 0);
	return 0;
}

SEC("tracepoint/syscalls/sys_exit_openat")
int exit_open(struct open_ctx *ctx)
{
	__u32 pid = ctx->pid;
	__u64 *cnt = bpf_map_lookup_elem(&open_count, &pid);

	return cnt ? (int)*cnt : 0;
}

char LICENSE[] SEC("license") = "Dual BSD/GPL";
