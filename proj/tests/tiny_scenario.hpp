#pragma once

// The tiny fixed model scenario shared by the forward-oracle unit test and
// the acceptance suite: d_v = d_a = d_n = d_c = 2, one AFE of each kind,
// select 1+1, two nodes joined by one edge, one-hop sampler drawing the
// single neighbor. Every weight is pinned so the straight-line oracle can
// reproduce the full forward pass by hand.

#include "hpn/graphstore.hpp"
#include "hpn/model.hpp"
#include "oracle_tiny.hpp"

struct TinyScenario {
  hpn::Graph g;
  hpn::SplitAssignment sp;
  hpn::TaskView view;
  hpn::HpnModel model;
  TinyOracleInputs in;

  TinyScenario() {
    using namespace hpn;
    in = TinyOracleInputs{
        {{0.7, -0.1}, {0.2, 0.5}},                          // A
        {{0.3, 0.6}, {-0.4, 0.8}},                          // R
        {{0.25, -0.3, 0.1, 0.45}, {0.05, 0.6, -0.2, 0.3}},  // Wn
        {0.02, -0.03},                                      // bn
        {{0.8, -0.25}, {0.15, 0.55}},                       // Wc
        {0.01, 0.04},                                       // bc
        {{0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.05, -0.15},
         {-0.1, 0.45, -0.3, 0.2, 0.35, -0.05, 0.25, 0.1}},  // Wy
        {0.005, -0.01},                                     // by
        {1.0, 0.25},                                        // x(0)
        {0.2, 1.0},                                         // x(1)
    };

    g.num_nodes = 2;
    g.feat_dim = 2;
    g.features = Matrix(2, 2);
    g.features.at(0, 0) = in.x[0];
    g.features.at(0, 1) = in.x[1];
    g.features.at(1, 0) = in.u[0];
    g.features.at(1, 1) = in.u[1];
    g.labels = {0, 1};
    g.adj = {{1}, {0}};
    sp.tag = {Split::Train, Split::Train};
    view = whole_view(g, sp);

    ModelDims dims;
    dims.d_v = dims.d_a = dims.d_n = dims.d_c = 2;
    dims.l_a = dims.l_r = 1;
    dims.l_a_sel = dims.l_r_sel = 1;
    dims.classes_per_task = 2;
    dims.t_a = 0.3;
    dims.t_n = 0.3;
    dims.t_c = 0.4;

    model.dims = dims;
    model.sampler = SamplerConfig{1, {1}};
    model.alpha = 1.0;
    model.beta = 1.0;
    model.bank.d_v = 2;
    model.bank.d_a = 2;
    model.bank.node_afes = {
        Matrix::from_rows({{in.A[0][0], in.A[0][1]}, {in.A[1][0], in.A[1][1]}})};
    model.bank.struct_afes = {
        Matrix::from_rows({{in.R[0][0], in.R[0][1]}, {in.R[1][0], in.R[1][1]}})};
    model.a_store = PrototypeStore(2, 0.3);
    model.n_store = PrototypeStore(2, 0.3);
    model.c_store = PrototypeStore(2, 0.4);
    model.fc_a2n.W = Matrix::from_rows({{in.Wn[0][0], in.Wn[0][1], in.Wn[0][2], in.Wn[0][3]},
                                        {in.Wn[1][0], in.Wn[1][1], in.Wn[1][2], in.Wn[1][3]}});
    model.fc_a2n.b = Vector{in.bn[0], in.bn[1]};
    model.fc_n2c.W = Matrix::from_rows({{in.Wc[0][0], in.Wc[0][1]}, {in.Wc[1][0], in.Wc[1][1]}});
    model.fc_n2c.b = Vector{in.bc[0], in.bc[1]};
    model.classifier.W = Matrix(2, 8);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 8; ++c) model.classifier.W.at(r, c) = in.Wy[r][c];
    model.classifier.b = Vector{in.by[0], in.by[1]};
    model.validate();
  }
};
