from django import forms

from .corpus import UNKNOWN_TOPIC


ENGAGEMENT_FIELDS = ('retweet_count', 'like_count', 'reply_count', 'quote_count')


class TweetRecordForm(forms.Form):
    """Схема одной строки входного JSONL-файла с твитами.

    require_engagement=False - для предсказаний: счётчики вовлечённости
    необязательны и по умолчанию равны 0.
    """

    id = forms.CharField(max_length=64)
    # strip=False: text_length считается по сырому тексту
    text = forms.CharField(strip=False)
    created_at = forms.DateTimeField()
    source_client = forms.CharField(required=False)
    hashtag_count = forms.IntegerField(min_value=0)
    mention_count = forms.IntegerField(min_value=0)
    followers = forms.IntegerField(min_value=0)
    following = forms.IntegerField(min_value=0)
    verified = forms.NullBooleanField()
    retweet_count = forms.IntegerField(min_value=0)
    like_count = forms.IntegerField(min_value=0)
    reply_count = forms.IntegerField(min_value=0)
    quote_count = forms.IntegerField(min_value=0)
    topic = forms.CharField(required=False)
    lang = forms.CharField(required=False)
    is_retweet = forms.NullBooleanField()

    def __init__(self, *args, require_engagement=True, **kwargs):
        super().__init__(*args, **kwargs)
        if not require_engagement:
            for name in ENGAGEMENT_FIELDS:
                self.fields[name].required = False

    def clean(self):
        cleaned_data = super().clean()
        for name in ENGAGEMENT_FIELDS:
            if name not in self.errors and cleaned_data.get(name) is None:
                cleaned_data[name] = 0
        return cleaned_data

    def clean_id(self):
        value = self.cleaned_data['id'].strip()
        if not value:
            raise forms.ValidationError('Пустой идентификатор.')
        return value

    def clean_text(self):
        value = self.cleaned_data['text']
        if not value.strip():
            raise forms.ValidationError('Текст пуст после удаления пробелов.')
        return value

    def clean_verified(self):
        value = self.cleaned_data['verified']
        if value is None:
            raise forms.ValidationError('Обязательное поле.')
        return value

    def clean_topic(self):
        return (self.cleaned_data.get('topic') or '').strip() or UNKNOWN_TOPIC

    def clean_lang(self):
        return (self.cleaned_data.get('lang') or '').strip().lower() or 'en'

    def clean_is_retweet(self):
        return bool(self.cleaned_data.get('is_retweet'))

    def error_lines(self, line_number):
        """Ошибки формы в виде 'строка N, поле F: сообщение'"""
        lines = []
        for field, errors in self.errors.items():
            for error in errors:
                lines.append(f"строка {line_number}, поле {field}: {error}")
        return lines
