"""Interior point of {y : A^T y > 0} on a deliberately flat cone.

The columns form a fan that almost spans a halfspace, so the von
Neumann phase alone cannot make progress and the solver has to
rescale. A hook watches each rescaling and confirms the determinant
ledger grows by at least 16/9 every time, which is what caps the
total number of rescalings.
"""

import numpy as np

from lincone import check_image_certificate, full_support_image


def flat_fan(delta, k=12):
    """Unit columns spread across almost all of a halfspace."""
    angles = np.linspace(-(np.pi / 2 - delta), np.pi / 2 - delta, k)
    return np.vstack([np.cos(angles), np.sin(angles)])


def main():
    mat = flat_fan(0.01)
    m, n = mat.shape
    print(f"fan instance: {m} x {n}, half-angle {np.pi / 2 - 0.01:.4f} rad")

    ratios = []

    def watch(event, **data):
        if event == "rescale":
            ratios.append(data["ratio"])

    cert, report = full_support_image(mat, hook=watch)
    print(f"status: {report.status}")
    print(f"rescalings: {report.rescalings}, inner iterations: {report.fo_iters}")
    for i, r in enumerate(ratios):
        print(f"  rescale {i + 1}: det grew x{r:.4f}")
    if ratios:
        print(f"worst growth factor {min(ratios):.4f} (floor is 16/9 = {16 / 9:.4f})")

    margins = mat.T @ cert.y
    print(f"smallest margin a_i . y: {margins.min():.6f}")
    check = check_image_certificate(mat, cert)
    print(f"independent checker: valid={check.valid} ({check.message})")


if __name__ == "__main__":
    main()
