"""Split the columns of a degenerate instance into kernel and image supports.

For any matrix the maximum kernel support S and maximum image support T
partition the column indices: S holds the columns that can carry a
positive kernel vector, T the ones some y separates strictly. Neither
side is full here by construction, so both max-support solvers have
real work to do. The exact rational oracle arbitrates.
"""

from lincone import (
    check_complementary_pair,
    exact_support_oracle,
    gen_degenerate,
    max_support_image,
    max_support_kernel,
)


def main():
    inst = gen_degenerate(3, 8, s=5, seed=11)
    n = inst.mat.shape[1]
    print(f"instance: 3 x {n}, planted kernel support of size 5")
    print(inst.mat.astype(int))

    kcert, ksupp, krep = max_support_kernel(inst.mat)
    icert, isupp, irep = max_support_image(inst.mat)
    print(f"kernel side: support {sorted(ksupp.tolist())} ({krep.status}, "
          f"{krep.rescalings} rescalings, {krep.removals} removals)")
    print(f"image side:  support {sorted(isupp.tolist())} ({irep.status}, "
          f"{irep.rescalings} rescalings, {irep.removals} removals)")

    pair = check_complementary_pair(ksupp, isupp, n)
    print(f"disjoint cover of all {n} columns: {pair.valid} ({pair.message})")

    exact_s, exact_t = exact_support_oracle(inst.mat)
    agree = sorted(ksupp.tolist()) == sorted(exact_s) and sorted(isupp.tolist()) == sorted(exact_t)
    print(f"matches exact rational oracle: {agree}")


if __name__ == "__main__":
    main()
