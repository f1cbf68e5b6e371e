from textshift.fixtures import fixture_path, make_reviews, make_store, write_reviews, write_store


def test_bundled_fixtures_regenerate_identically(tmp_path):
    write_reviews(tmp_path / "mr.csv", make_reviews())
    write_store(tmp_path / "glove.txt", make_store())
    assert (tmp_path / "mr.csv").read_bytes() == fixture_path("mr").read_bytes()
    assert (tmp_path / "glove.txt").read_bytes() == fixture_path("glove").read_bytes()


def test_reviews_balanced():
    labels = [label for label, _ in make_reviews()]
    assert len(labels) == 2000 and 900 <= sum(labels) <= 1100
