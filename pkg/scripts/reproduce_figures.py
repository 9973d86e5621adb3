"""Check the two bundled example instances and print what each one shows."""
from threedpm import blocking_triples, delta, enumerate_matchings, verify
from threedpm import io


def main():
    inst, M, Mp = io.fixture("fig1"), io.fixture("fig1_M"), io.fixture("fig1_Mprime")
    print("first example")
    for prop in ("weak-stable", "strong-stable", "popular"):
        print(f"  M {prop}: {verify(inst, M, prop).holds}")
    print(f"  delta(M', M) = {delta(inst, Mp, M)}")

    inst, M = io.fixture("fig2"), io.fixture("fig2_M")
    print("second example")
    print(f"  blocking triples of M: {[tuple(t) for t in blocking_triples(inst, M, 'weak')]}")
    print(f"  matchings: {sum(1 for _ in enumerate_matchings(inst))}")
    print(f"  M strongly popular: {verify(inst, M, 'strong-popular').holds}")


if __name__ == "__main__":
    main()
