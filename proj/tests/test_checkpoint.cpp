#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "unfold/checkpoint.hpp"
#include "unfold/compression.hpp"

using namespace unfold;

namespace {

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("checkpoint round-trips bit-exactly") {
    Rng rng(123);
    ModelParams m = init_params(rng, 3, 5, 4);
    m.frozen_prefix = 2;
    m.train_steps = 777;
    prune_element(m, 0.3); // nontrivial masks
    m.layers[1].t = 0.123456789012345678;

    const std::string path = "ckpt_roundtrip_test.json";
    save_checkpoint(m, "R-DetNet", path);
    const Checkpoint ck = load_checkpoint(path);

    CHECK(ck.label == "R-DetNet");
    CHECK(ck.params.n_tx == m.n_tx);
    CHECK(ck.params.n_rx == m.n_rx);
    CHECK(ck.params.dims.z_dim == m.dims.z_dim);
    CHECK(ck.params.frozen_prefix == 2);
    CHECK(ck.params.train_steps == 777);
    REQUIRE(ck.params.depth() == m.depth());
    for (int l = 0; l < m.depth(); ++l) {
        CHECK(ck.params.layers[l].W1.data == m.layers[l].W1.data);
        CHECK(ck.params.layers[l].W2.data == m.layers[l].W2.data);
        CHECK(ck.params.layers[l].W3.data == m.layers[l].W3.data);
        CHECK(ck.params.layers[l].b1 == m.layers[l].b1);
        CHECK(ck.params.layers[l].b2 == m.layers[l].b2);
        CHECK(ck.params.layers[l].b3 == m.layers[l].b3);
        CHECK(ck.params.layers[l].t == m.layers[l].t);
        CHECK(ck.params.layers[l].M1.data == m.layers[l].M1.data);
        CHECK(ck.params.layers[l].M2.data == m.layers[l].M2.data);
        CHECK(ck.params.layers[l].M3.data == m.layers[l].M3.data);
        CHECK(ck.params.layers[l].all_ones == m.layers[l].all_ones);
    }

    // save -> load -> save is byte-stable
    const std::string path2 = "ckpt_roundtrip_test2.json";
    save_checkpoint(ck.params, ck.label, path2);
    CHECK(slurp(path) == slurp(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("loading a missing or malformed checkpoint fails cleanly") {
    CHECK_THROWS_AS(load_checkpoint("does_not_exist.json"), ConfigError);
    const std::string path = "ckpt_bad_test.json";
    {
        std::ofstream out(path);
        out << "{\"format\": \"something-else\"}";
    }
    CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
    std::remove(path.c_str());
}
