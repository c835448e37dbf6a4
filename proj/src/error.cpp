#include "sapg/error.hpp"

namespace sapg {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DisconnectedGraph: return "DisconnectedGraph";
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::LoopEdge: return "LoopEdge";
    case Errc::TooFewEdges: return "TooFewEdges";
    case Errc::VertexOutOfRange: return "VertexOutOfRange";
    case Errc::SubsetCapExceeded: return "SubsetCapExceeded";
    case Errc::OutsideSimplex: return "OutsideSimplex";
    case Errc::EmptyOrFullSubset: return "EmptyOrFullSubset";
    case Errc::DegenerateRay: return "DegenerateRay";
    case Errc::NoExit: return "NoExit";
    case Errc::MemoryBudgetExceeded: return "MemoryBudgetExceeded";
    case Errc::LayerOutOfRange: return "LayerOutOfRange";
    case Errc::NegativeEntry: return "NegativeEntry";
    case Errc::IoFailure: return "IoFailure";
    case Errc::FormatMismatch: return "FormatMismatch";
    case Errc::GraphHashMismatch: return "GraphHashMismatch";
    case Errc::IllegalStrategyMove: return "IllegalStrategyMove";
    case Errc::StepTooLarge: return "StepTooLarge";
    case Errc::DomainError: return "DomainError";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace sapg
