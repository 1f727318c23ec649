//! Hiding four encrypted QR codes per frame of a YUV 4:2:0 video.
//!
//! Each QR bit plane is permuted and encrypted with a keystream variant of
//! ElGamal, then written into the LSBs of the HL and HH bands of an integer
//! Haar transform of luma and into the chroma samples.

pub mod attacks;
pub mod bitplane;
pub mod elgamal;
pub mod error;
pub mod permute;
pub mod quality;
pub mod stego;
pub mod videoio;
pub mod wavelet;

pub use error::{Error, ErrorKind, Result};
