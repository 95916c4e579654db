#include "sflab/sf_critic.hpp"

namespace sflab::agent {

namespace {

std::vector<int> encoder_widths(int in, const SfCriticShape& shape) {
  std::vector<int> widths{in};
  for (int k = 0; k < shape.encoder_layers; ++k) widths.push_back(shape.encoder_units);
  return widths;
}

std::vector<int> output_widths(const SfCriticShape& shape, int outputs) {
  std::vector<int> widths{3 * shape.encoder_units};
  for (int k = 0; k < shape.output_layers; ++k) widths.push_back(shape.encoder_units);
  widths.push_back(outputs);
  return widths;
}

void append(nn::ParameterList& out, nn::ParameterList more) { out.insert(out.end(), more.begin(), more.end()); }
void append(nn::ConstParameterList& out, nn::ConstParameterList more) {
  out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

EncoderNet::EncoderNet(const SfCriticShape& shape, int outputs, const std::string& name, Rng& rng) {
  if (shape.encoder_layers < 1) throw Error("critic encoders need at least one layer");
  state_ = nn::Mlp(encoder_widths(shape.obs_dim, shape), nn::Activation::kRelu, name + ".state", rng);
  action_ = nn::Mlp(encoder_widths(shape.action_dim, shape), nn::Activation::kRelu, name + ".action", rng);
  weight_ = nn::Mlp(encoder_widths(shape.feature_dim, shape), nn::Activation::kRelu, name + ".weight", rng);
  output_ = nn::Mlp(output_widths(shape, outputs), nn::Activation::kNone, name + ".output", rng);
}

Matrix EncoderNet::forward(const Matrix& s, const Matrix& a, const Matrix& w) const {
  const Eigen::Index e = state_.output_size();
  Matrix h(3 * e, s.cols());
  h.topRows(e) = state_.forward(s);
  h.middleRows(e, e) = action_.forward(a);
  h.bottomRows(e) = weight_.forward(w);
  return output_.forward(h);
}

Matrix EncoderNet::forward(const Matrix& s, const Matrix& a, const Matrix& w, EncoderTape& tape) const {
  const Eigen::Index e = state_.output_size();
  Matrix h(3 * e, s.cols());
  h.topRows(e) = state_.forward(s, tape.state);
  h.middleRows(e, e) = action_.forward(a, tape.action);
  h.bottomRows(e) = weight_.forward(w, tape.weight);
  return output_.forward(h, tape.output);
}

SfInputGrads EncoderNet::backward(const EncoderTape& tape, const Matrix& dy, bool param_grads) {
  const Eigen::Index e = state_.output_size();
  const Matrix dh = output_.backward(tape.output, dy, param_grads);
  SfInputGrads g;
  g.s = state_.backward(tape.state, dh.topRows(e), param_grads);
  g.a = action_.backward(tape.action, dh.middleRows(e, e), param_grads);
  g.w = weight_.backward(tape.weight, dh.bottomRows(e), param_grads);
  return g;
}

nn::ParameterList EncoderNet::parameters() {
  nn::ParameterList out = state_.parameters();
  append(out, action_.parameters());
  append(out, weight_.parameters());
  append(out, output_.parameters());
  return out;
}

nn::ConstParameterList EncoderNet::parameters() const {
  nn::ConstParameterList out = state_.parameters();
  append(out, action_.parameters());
  append(out, weight_.parameters());
  append(out, output_.parameters());
  return out;
}

std::size_t EncoderNet::parameter_count(const SfCriticShape& shape, int outputs) {
  return nn::Mlp::parameter_count(encoder_widths(shape.obs_dim, shape)) +
         nn::Mlp::parameter_count(encoder_widths(shape.action_dim, shape)) +
         nn::Mlp::parameter_count(encoder_widths(shape.feature_dim, shape)) +
         nn::Mlp::parameter_count(output_widths(shape, outputs));
}

SfaStack::SfaStack(const SfCriticShape& shape, const std::string& name, Rng& rng) {
  if (shape.feature_dim < 1) throw DimensionError("SfaStack: feature dimension must be positive");
  blocks_.reserve(static_cast<std::size_t>(shape.feature_dim));
  for (int i = 0; i < shape.feature_dim; ++i) blocks_.emplace_back(shape, 1, name + ".block" + std::to_string(i), rng);
}

Matrix SfaStack::forward(const Matrix& s, const Matrix& a, const Matrix& w) const {
  Matrix psi(feature_dim(), s.cols());
  for (std::size_t i = 0; i < blocks_.size(); ++i) psi.row(static_cast<Eigen::Index>(i)) = blocks_[i].forward(s, a, w);
  return psi;
}

Matrix SfaStack::forward(const Matrix& s, const Matrix& a, const Matrix& w, Tape& tape) const {
  tape.resize(blocks_.size());
  Matrix psi(feature_dim(), s.cols());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    psi.row(static_cast<Eigen::Index>(i)) = blocks_[i].forward(s, a, w, tape[i]);
  }
  return psi;
}

SfInputGrads SfaStack::backward(const Tape& tape, const Matrix& dpsi, bool param_grads) {
  require_dims(dpsi.rows(), feature_dim(), "SfaStack::backward rows");
  SfInputGrads total;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    SfInputGrads g = blocks_[i].backward(tape[i], dpsi.row(static_cast<Eigen::Index>(i)), param_grads);
    if (i == 0) {
      total = std::move(g);
    } else {
      total.s += g.s;
      total.a += g.a;
      total.w += g.w;
    }
  }
  return total;
}

nn::ParameterList SfaStack::parameters() {
  nn::ParameterList out;
  for (SfaBlock& b : blocks_) append(out, b.parameters());
  return out;
}

nn::ConstParameterList SfaStack::parameters() const {
  nn::ConstParameterList out;
  for (const SfaBlock& b : blocks_) append(out, b.parameters());
  return out;
}

std::size_t SfaStack::parameter_count(const SfCriticShape& shape) {
  return static_cast<std::size_t>(shape.feature_dim) * EncoderNet::parameter_count(shape, 1);
}

CollapsedSfCritic::CollapsedSfCritic(const SfCriticShape& shape, const std::string& name, Rng& rng)
    : net_(shape, shape.feature_dim, name, rng), feature_dim_(shape.feature_dim) {}

std::size_t CollapsedSfCritic::parameter_count(const SfCriticShape& shape) {
  return EncoderNet::parameter_count(shape, shape.feature_dim);
}

Eigen::RowVectorXd q_from_psi(const Matrix& psi, const Matrix& w) {
  require_dims(psi.rows(), w.rows(), "q_from_psi rows");
  require_dims(psi.cols(), w.cols(), "q_from_psi cols");
  return psi.cwiseProduct(w).colwise().sum();
}

double q_from_psi(const Vector& psi, const Vector& w) {
  require_dims(psi.size(), w.size(), "q_from_psi");
  return psi.dot(w);
}

}  // namespace sflab::agent
