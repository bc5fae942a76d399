#include "regclust/em.hpp"

namespace regclust {

void EmOptions::validate() const {
    if (restarts < 1) throw Error(ErrorCode::InvalidSpec, "restarts must be >= 1");
    if (max_iters < 1) throw Error(ErrorCode::InvalidSpec, "max_iters must be >= 1");
    if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidSpec, "tol must be >= 0");
    if (irls_max_iters < 1) throw Error(ErrorCode::InvalidSpec, "irls_max_iters must be >= 1");
}

}  // namespace regclust
