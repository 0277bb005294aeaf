#include "robinp/errors.hpp"
#include "robinp/mesh.hpp"
#include "robinp/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace robinp;

namespace {

double total_measure(const Mesh& m) {
    const auto w = m.element_measures();
    return std::accumulate(w.begin(), w.end(), 0.0);
}

// Every interior edge is shared by exactly two triangles, every boundary edge by one.
void expect_conforming(const Mesh& m) {
    std::map<std::pair<std::size_t, std::size_t>, int> count;
    for (std::size_t k = 0; k < m.num_elements(); ++k) {
        const auto& e = m.element(k);
        for (int j = 0; j < 3; ++j) {
            auto a = e[j], b = e[(j + 1) % 3];
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    std::set<std::pair<std::size_t, std::size_t>> boundary;
    for (std::size_t f = 0; f < m.num_facets(); ++f) {
        const auto& e = m.facet(f);
        boundary.insert({std::min(e[0], e[1]), std::max(e[0], e[1])});
    }
    for (const auto& [edge, c] : count) {
        EXPECT_EQ(c, boundary.count(edge) ? 1 : 2) << edge.first << "-" << edge.second;
    }
    EXPECT_EQ(boundary.size(), m.num_facets());
}

}  // namespace

TEST(IntervalMesh, FourCells) {
    const auto m = build_interval_mesh(0.0, 1.0, 4);
    ASSERT_EQ(m->num_nodes(), 5u);
    EXPECT_EQ(m->num_elements(), 4u);
    EXPECT_EQ(m->num_facets(), 2u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(m->node(i)[0], 0.25 * static_cast<double>(i));
}

TEST(IntervalMesh, SingleCell) {
    const auto m = build_interval_mesh(0.0, 1.0, 1);
    EXPECT_EQ(m->num_nodes(), 2u);
    ASSERT_EQ(m->num_elements(), 1u);
    EXPECT_DOUBLE_EQ(m->element_measure(0), 1.0);
}

TEST(IntervalMesh, RejectsBadInput) {
    EXPECT_THROW((void)build_interval_mesh(1.0, 0.0, 4), InvalidArgument);
    EXPECT_THROW((void)build_interval_mesh(0.0, 1.0, 0), InvalidArgument);
    EXPECT_THROW((void)build_interval_mesh(0.0, std::numeric_limits<double>::infinity(), 2), InvalidArgument);
}

TEST(IntervalMesh, RefinementHalvesMeasures) {
    const auto coarse = build_interval_mesh(-1.0, 2.0, 6);
    const auto fine = build_interval_mesh(-1.0, 2.0, 12);
    for (std::size_t k = 0; k < fine->num_elements(); ++k) {
        EXPECT_EQ(fine->element_measure(k), 0.5 * coarse->element_measure(k / 2));
    }
}

TEST(IntervalMesh, BoundaryIsTwoPoints) {
    const auto m = build_interval_mesh(0.0, 1.0, 7);
    EXPECT_DOUBLE_EQ(boundary_measure(*m), 2.0);
    for (std::size_t i = 0; i < m->num_nodes(); ++i) {
        EXPECT_EQ(m->is_boundary_node(i), i == 0 || i == 7);
        EXPECT_DOUBLE_EQ(m->boundary_weight()[i], m->is_boundary_node(i) ? 1.0 : 0.0);
    }
}

TEST(RectangleMesh, UnitSquareOneCell) {
    const auto m = build_rectangle_mesh(1.0, 1.0, 1, 1);
    EXPECT_EQ(m->num_nodes(), 4u);
    ASSERT_EQ(m->num_elements(), 2u);
    EXPECT_DOUBLE_EQ(m->element_measure(0), 0.5);
    EXPECT_DOUBLE_EQ(m->element_measure(1), 0.5);
    ASSERT_EQ(m->num_facets(), 4u);
    for (std::size_t f = 0; f < 4; ++f) EXPECT_DOUBLE_EQ(m->facet_measure(f), 1.0);
    EXPECT_DOUBLE_EQ(boundary_measure(*m), 4.0);
}

TEST(RectangleMesh, TwoByTwo) {
    const auto m = build_rectangle_mesh(1.0, 1.0, 2, 2);
    EXPECT_EQ(m->num_nodes(), 9u);
    EXPECT_EQ(m->num_elements(), 8u);
    EXPECT_NEAR(total_measure(*m), 1.0, 1e-14);
    EXPECT_NEAR(boundary_measure(*m), 4.0, 1e-14);
    EXPECT_FALSE(m->is_boundary_node(4));
}

TEST(RectangleMesh, MeasuresMatchAreaAndPerimeter) {
    const auto m = build_rectangle_mesh(2.0, 1.0, 4, 2);
    EXPECT_NEAR(total_measure(*m), 2.0, 2e-15);
    EXPECT_NEAR(boundary_measure(*m), 6.0, 1e-14);
    EXPECT_NEAR(m->domain_measure(), 2.0, 2e-15);
}

TEST(RectangleMesh, InvariantsOnAGrid) {
    for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{3, 5}, {8, 8}, {1, 7}}) {
        const double lx = 1.7, ly = 0.6;
        const auto m = build_rectangle_mesh(lx, ly, nx, ny);
        EXPECT_NEAR(total_measure(*m), lx * ly, 1e-12 * lx * ly);
        EXPECT_NEAR(boundary_measure(*m), 2 * (lx + ly), 1e-12);
        for (std::size_t k = 0; k < m->num_elements(); ++k) {
            EXPECT_GT(m->element_measure(k), 0.0);
            for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(m->element(k)[j], m->num_nodes());
        }
        std::vector<bool> on_facet(m->num_nodes(), false);
        for (std::size_t f = 0; f < m->num_facets(); ++f) {
            on_facet[m->facet(f)[0]] = on_facet[m->facet(f)[1]] = true;
        }
        for (std::size_t i = 0; i < m->num_nodes(); ++i) EXPECT_EQ(on_facet[i], m->is_boundary_node(i));
        expect_conforming(*m);
    }
}

TEST(RectangleMesh, NodeOrderingIsLexicographic) {
    const std::size_t nx = 3, ny = 2;
    const auto m = build_rectangle_mesh(3.0, 2.0, nx, ny);
    for (std::size_t j = 0; j <= ny; ++j) {
        for (std::size_t i = 0; i <= nx; ++i) {
            const auto& z = m->node(j * (nx + 1) + i);
            EXPECT_DOUBLE_EQ(z[0], static_cast<double>(i));
            EXPECT_DOUBLE_EQ(z[1], static_cast<double>(j));
        }
    }
}

TEST(RectangleMesh, LumpedMassSumsToArea) {
    const auto m = build_rectangle_mesh(2.0, 3.0, 5, 4);
    const auto lm = m->lumped_mass();
    EXPECT_NEAR(std::accumulate(lm.begin(), lm.end(), 0.0), 6.0, 1e-13);
    const auto bw = m->boundary_weight();
    EXPECT_NEAR(std::accumulate(bw.begin(), bw.end(), 0.0), 10.0, 1e-13);
}

TEST(Mesh, RejectsDegenerateElements) {
    std::vector<Point> nodes{{0, 0}, {1, 0}, {2, 0}};
    EXPECT_THROW(Mesh(2, nodes, {{0, 1, 2}}, {{0, 1}}), InvalidArgument);
}

TEST(Mesh, CsvDumpHasNodesAndElements) {
    const auto m = build_interval_mesh(0.0, 1.0, 2);
    std::ostringstream os;
    write_mesh_csv(os, *m);
    EXPECT_NE(os.str().find("node_id,x"), std::string::npos);
    EXPECT_NE(os.str().find("element_id,n0,n1"), std::string::npos);
}

TEST(DiscreteField, ValidatesSizeAndFiniteness) {
    const auto m = build_interval_mesh(0.0, 1.0, 3);
    EXPECT_THROW(DiscreteField(m, {1.0, 2.0}), InvalidArgument);
    EXPECT_THROW(DiscreteField(m, {1.0, 2.0, std::nan(""), 0.0}), InvalidArgument);
    const DiscreteField f(m, {1.0, -3.0, 2.0, 0.5});
    EXPECT_EQ(f.min(), -3.0);
    EXPECT_EQ(f.max(), 2.0);
    EXPECT_EQ(f.max_abs(), 3.0);
}

TEST(ProblemSpec, Validation) {
    const auto m = build_interval_mesh(0.0, 1.0, 3);
    EXPECT_THROW(make_problem(m, 1.0, 1.0).validate(), InvalidArgument);
    EXPECT_THROW(make_problem(m, 2.0, -1.0).validate(), Error);
    EXPECT_THROW(make_problem(m, 2.0, 1.0, -1.0).validate(), InvalidArgument);
    EXPECT_NO_THROW(make_problem(m, 2.0, 0.0).validate());
    EXPECT_TRUE(make_problem(m, 2.0, 0.0).neumann());
    EXPECT_FALSE(make_problem(m, 2.0, 0.5).neumann());
}

TEST(ProblemSpec, EffectiveDelta) {
    const auto m = build_interval_mesh(0.0, 1.0, 3);
    EXPECT_EQ(make_problem(m, 1.5, 1.0).effective_delta(), kDefaultFluxRegularization);
    EXPECT_EQ(make_problem(m, 3.0, 1.0).effective_delta(), 0.0);
    EXPECT_EQ(make_problem(m, 3.0, 1.0, 1e-3).effective_delta(), 1e-3);
}
