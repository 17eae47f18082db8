use std::path::Path;

use exr::prelude::*;

use super::LinearImage;
use crate::Error;

/// Reads a 1- or 3-channel EXR without applying any transfer function.
///
/// Three-channel files must carry `R`, `G` and `B`; single-channel files may
/// use any channel name (conventionally `Y`). Half and uint samples are
/// widened to f32. Negative samples are clamped to zero with a warning;
/// non-finite samples are rejected.
pub fn read_linear_exr(path: impl AsRef<Path>) -> crate::Result<LinearImage> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    let image = read()
        .no_deep_data()
        .largest_resolution_level()
        .all_channels()
        .first_valid_layer()
        .all_attributes()
        .non_parallel()
        .from_file(path)
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let layer = image.layer_data;
    let (width, height) = (layer.size.width(), layer.size.height());
    let list = &layer.channel_data.list;

    let ordered: Vec<&AnyChannel<FlatSamples>> = match list.len() {
        1 => vec![&list[0]],
        3 => ["R", "G", "B"]
            .iter()
            .map(|name| {
                list.iter()
                    .find(|ch| ch.name.eq(name))
                    .ok_or_else(|| Error::Decode {
                        path: path.to_path_buf(),
                        message: format!("3-channel image lacks channel {name}"),
                    })
            })
            .collect::<crate::Result<_>>()?,
        n => return Err(Error::ChannelCount(n)),
    };
    let channels = ordered.len();
    let planes: Vec<Vec<f32>> = ordered
        .iter()
        .map(|ch| ch.sample_data.values_as_f32().collect())
        .collect();

    let mut data = Vec::with_capacity(width * height * channels);
    let mut clamped = 0usize;
    for p in 0..width * height {
        for plane in &planes {
            let v = plane[p];
            if v < 0.0 {
                clamped += 1;
                data.push(0.0);
            } else {
                data.push(v);
            }
        }
    }
    if clamped > 0 {
        log::warn!("{}: clamped {clamped} negative samples to 0", path.display());
    }
    LinearImage::new(width, height, channels, data)
}

/// Writes a 32-bit float, uncompressed EXR. Three-channel images become
/// `R`,`G`,`B`; single-channel images become `Y`.
pub fn write_linear_exr(img: &LinearImage, path: impl AsRef<Path>) -> crate::Result<()> {
    let path = path.as_ref();
    let names: &[&str] = if img.channels() == 1 {
        &["Y"]
    } else {
        &["R", "G", "B"]
    };
    let channels: SmallVec<[AnyChannel<FlatSamples>; 4]> = names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let plane: Vec<f32> = img.data().iter().skip(c).step_by(img.channels()).copied().collect();
            AnyChannel::new(*name, FlatSamples::F32(plane))
        })
        .collect();
    let layer = Layer::new(
        (img.width(), img.height()),
        LayerAttributes::default(),
        Encoding::UNCOMPRESSED,
        AnyChannels::sort(channels),
    );
    Image::from_layer(layer)
        .write()
        .non_parallel()
        .to_file(path)
        .map_err(|e| match e {
            exr::error::Error::Io(io) => Error::io(path, io),
            other => Error::Encode {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
}
