use serde::Serialize;

/// Published test accuracies (percent) for one trunk, as comparison targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedAccuracy {
    pub backbone: &'static str,
    pub single: f64,
    pub five_crop: f64,
    pub illum_single: f64,
    pub illum_five_crop: f64,
}

pub const PUBLISHED_ACCURACY: [PublishedAccuracy; 4] = [
    PublishedAccuracy {
        backbone: "vgg16",
        single: 97.3545,
        five_crop: 97.8836,
        illum_single: 95.2381,
        illum_five_crop: 97.3545,
    },
    PublishedAccuracy {
        backbone: "resnet152",
        single: 91.0053,
        five_crop: 94.1799,
        illum_single: 85.7143,
        illum_five_crop: 90.4762,
    },
    PublishedAccuracy {
        backbone: "densenet121",
        single: 95.7672,
        five_crop: 96.2963,
        illum_single: 94.1799,
        illum_five_crop: 96.2963,
    },
    PublishedAccuracy {
        backbone: "nasnet-mobile",
        single: 94.1799,
        five_crop: 96.2963,
        illum_single: 87.8307,
        illum_five_crop: 89.9471,
    },
];

pub fn published_accuracy(backbone: &str) -> Option<&'static PublishedAccuracy> {
    PUBLISHED_ACCURACY.iter().find(|p| p.backbone == backbone)
}

impl PublishedAccuracy {
    pub fn lookup(&self, tta: bool, illumination: bool) -> f64 {
        match (tta, illumination) {
            (false, false) => self.single,
            (true, false) => self.five_crop,
            (false, true) => self.illum_single,
            (true, true) => self.illum_five_crop,
        }
    }
}
