//! Exact computation of the 3D index of ideal triangulations.

pub mod qlaurent;
pub mod tetindex;
pub mod intlinalg;
pub mod triangulation;
pub mod edgebasis;
pub mod indexengine;
pub mod lp;
pub mod anglestruct;
pub mod pachner;
