// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

/* Target-BTF fixture, "5.15" flavor: context struct layouts identical to
 * what the fixture eBPF objects were compiled against. The .BTF section of
 * the compiled object is extracted into tests/fixtures/btf/5.15/vmlinux.btf
 * by the rebuild script. */

typedef unsigned long long u64;
typedef unsigned int u32;

struct trace_exec_ctx {
	int pid;
	char comm[16];
};

struct open_ctx {
	int pid;
	int flags;
};

struct xdp_ctx {
	u32 pkt_len;
};

/* x86_64 register frame (kernel pt_regs order). */
struct pt_regs {
	u64 r15, r14, r13, r12, bp, bx, r11, r10;
	u64 r9, r8, ax, cx, dx, si, di;
	u64 orig_ax, ip, cs, flags, sp, ss;
};

/* Anchor so every fixture type reaches the object's BTF. */
void *fixture_btf_anchor(struct trace_exec_ctx *a, struct open_ctx *b,
			 struct xdp_ctx *c, struct pt_regs *d)
{
	return (void *)((unsigned long)a ^ (unsigned long)b ^
			(unsigned long)c ^ (unsigned long)d);
}
